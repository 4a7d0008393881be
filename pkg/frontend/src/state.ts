/** Shared selection state driving all four views.
 *
 * Invariant: the selection only ever contains testcases that are visible
 * under the current time range and fuzzer visibility set; any change that
 * would break this prunes the selection instead.
 */

export type TcKey = string;

export const keyOf = (fuzzer: string, id: number): TcKey => `${fuzzer}/${id}`;

export const parseKey = (key: TcKey): { fuzzer: string; id: number } => {
  const slash = key.lastIndexOf("/");
  return { fuzzer: key.slice(0, slash), id: Number(key.slice(slash + 1)) };
};

export interface TestcaseLite {
  fuzzer: string;
  id: number;
  time: number;
}

export interface Snapshot {
  selected: ReadonlySet<TcKey>;
  timeRange: readonly [number, number];
  visibleFuzzers: ReadonlySet<string>;
  compareFuzzer: string | null;
}

export type Listener = (snapshot: Snapshot) => void;

export class SelectionStore {
  private selected = new Set<TcKey>();
  private timeRange: [number, number];
  private visibleFuzzers: Set<string>;
  private compareFuzzer: string | null = null;
  private listeners: Listener[] = [];
  private universe = new Map<TcKey, TestcaseLite>();

  constructor(
    public readonly horizon: number,
    fuzzers: string[],
    testcases: TestcaseLite[],
  ) {
    this.timeRange = [0, horizon];
    this.visibleFuzzers = new Set(fuzzers);
    for (const tc of testcases) {
      this.universe.set(keyOf(tc.fuzzer, tc.id), tc);
    }
  }

  snapshot(): Snapshot {
    return {
      selected: new Set(this.selected),
      timeRange: [this.timeRange[0], this.timeRange[1]],
      visibleFuzzers: new Set(this.visibleFuzzers),
      compareFuzzer: this.compareFuzzer,
    };
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify(): void {
    const snapshot = this.snapshot();
    for (const listener of this.listeners) listener(snapshot);
  }

  isVisibleKey(key: TcKey): boolean {
    const tc = this.universe.get(key);
    return tc !== undefined && this.isVisible(tc);
  }

  isVisible(tc: TestcaseLite): boolean {
    return (
      this.visibleFuzzers.has(tc.fuzzer) &&
      tc.time >= this.timeRange[0] &&
      tc.time <= this.timeRange[1]
    );
  }

  selectedTestcases(): TestcaseLite[] {
    const out: TestcaseLite[] = [];
    for (const key of this.selected) {
      const tc = this.universe.get(key);
      if (tc) out.push(tc);
    }
    return out;
  }

  /** Replace the selection; anything not currently visible is dropped. */
  setSelection(keys: Iterable<TcKey>): void {
    const next = new Set<TcKey>();
    for (const key of keys) {
      if (this.isVisibleKey(key)) next.add(key);
    }
    if (!setsEqual(next, this.selected)) {
      this.selected = next;
      this.notify();
    } else if (next.size === 0 && this.selected.size === 0) {
      // Brushing an empty region still clears: no-op, nothing to announce.
    }
  }

  toggleSelected(key: TcKey): void {
    if (this.selected.has(key)) {
      this.selected.delete(key);
      this.notify();
    } else if (this.isVisibleKey(key)) {
      this.selected.add(key);
      this.notify();
    }
  }

  clearSelection(): void {
    if (this.selected.size > 0) {
      this.selected.clear();
      this.notify();
    }
  }

  setTimeRange(lo: number, hi: number): void {
    const clampedLo = Math.max(0, Math.min(lo, this.horizon));
    const clampedHi = Math.max(clampedLo, Math.min(hi, this.horizon));
    if (clampedLo === this.timeRange[0] && clampedHi === this.timeRange[1]) return;
    this.timeRange = [clampedLo, clampedHi];
    this.prune();
    this.notify();
  }

  toggleFuzzer(fuzzer: string): void {
    if (this.visibleFuzzers.has(fuzzer)) {
      this.visibleFuzzers.delete(fuzzer);
    } else {
      this.visibleFuzzers.add(fuzzer);
    }
    this.prune();
    this.notify();
  }

  setCompare(fuzzer: string | null): void {
    if (fuzzer === this.compareFuzzer) return;
    this.compareFuzzer = fuzzer;
    this.notify();
  }

  private prune(): void {
    for (const key of [...this.selected]) {
      if (!this.isVisibleKey(key)) this.selected.delete(key);
    }
  }
}

function setsEqual(a: ReadonlySet<string>, b: ReadonlySet<string>): boolean {
  if (a.size !== b.size) return false;
  for (const value of a) if (!b.has(value)) return false;
  return true;
}
