/** Filter panel: fuzzer visibility toggles (click the name), a two-handle
 * time range slider, and the compare-fuzzer picker for the graph overlay.
 * All filtering is client-side; no request leaves this panel.
 */

import * as d3 from "d3";
import { SelectionStore } from "./state";
import type { FuzzerInfo } from "./types";

const SLIDER_HEIGHT = 36;
const SLIDER_MARGIN = { left: 10, right: 10 };

export class FilterPanel {
  private chips = new Map<string, HTMLElement>();
  private scale: d3.ScaleLinear<number, number>;
  private brush: d3.BrushBehavior<unknown>;
  private brushG: d3.Selection<SVGGElement, unknown, null, undefined>;
  private readout: HTMLElement;

  constructor(
    container: HTMLElement,
    private store: SelectionStore,
    fuzzers: FuzzerInfo[],
    colorOf: (fuzzer: string) => string,
    width = 460,
  ) {
    const chipRow = document.createElement("div");
    chipRow.className = "fuzzer-chips";
    for (const fuzzer of fuzzers) {
      const chip = document.createElement("span");
      chip.className = "fuzzer-chip";
      chip.dataset.fuzzer = fuzzer.id;
      chip.style.borderColor = colorOf(fuzzer.id);
      chip.textContent = fuzzer.name;
      chip.addEventListener("click", () => this.toggleFuzzer(fuzzer.id));
      chipRow.appendChild(chip);
      this.chips.set(fuzzer.id, chip);
    }
    container.appendChild(chipRow);

    const compareRow = document.createElement("div");
    compareRow.className = "compare-row";
    const compareLabel = document.createElement("label");
    compareLabel.textContent = "compare ";
    const select = document.createElement("select");
    select.className = "compare-select";
    const none = document.createElement("option");
    none.value = "";
    none.textContent = "(none)";
    select.appendChild(none);
    for (const fuzzer of fuzzers) {
      const option = document.createElement("option");
      option.value = fuzzer.id;
      option.textContent = fuzzer.id;
      select.appendChild(option);
    }
    select.addEventListener("change", () => {
      this.store.setCompare(select.value === "" ? null : select.value);
    });
    compareLabel.appendChild(select);
    compareRow.appendChild(compareLabel);
    container.appendChild(compareRow);

    const sliderWidth = width - SLIDER_MARGIN.left - SLIDER_MARGIN.right;
    this.scale = d3.scaleLinear().domain([0, store.horizon || 1]).range([0, sliderWidth]);
    const svg = d3
      .select(container)
      .append("svg")
      .attr("class", "time-slider")
      .attr("viewBox", `0 0 ${width} ${SLIDER_HEIGHT}`);
    const g = svg.append("g").attr("transform", `translate(${SLIDER_MARGIN.left},4)`);
    g.append("g")
      .attr("class", "axis x")
      .attr("transform", "translate(0,18)")
      .call(d3.axisBottom(this.scale).ticks(6) as never);
    this.brush = d3
      .brushX()
      .extent([
        [0, 0],
        [sliderWidth, 18],
      ])
      .on("end", (event: d3.D3BrushEvent<unknown>) => {
        if (!event.sourceEvent) return; // programmatic move, already applied
        if (!event.selection) {
          this.store.setTimeRange(0, this.store.horizon);
          return;
        }
        const [px0, px1] = event.selection as [number, number];
        this.store.setTimeRange(this.scale.invert(px0), this.scale.invert(px1));
      });
    this.brushG = g.append("g").attr("class", "range-brush").call(this.brush);
    this.brushG.call(this.brush.move, [0, sliderWidth]);

    this.readout = document.createElement("div");
    this.readout.className = "range-readout";
    container.appendChild(this.readout);

    this.apply(store);
    store.subscribe(() => this.apply(store));
  }

  /** Programmatic equivalent of dragging the slider handles. */
  setRange(lo: number, hi: number): void {
    this.store.setTimeRange(lo, hi);
    this.brushG.call(this.brush.move, [this.scale(lo), this.scale(hi)]);
  }

  toggleFuzzer(fuzzer: string): void {
    this.store.toggleFuzzer(fuzzer);
  }

  private apply(store: SelectionStore): void {
    const snapshot = store.snapshot();
    for (const [fuzzer, chip] of this.chips.entries()) {
      chip.classList.toggle("off", !snapshot.visibleFuzzers.has(fuzzer));
    }
    const [lo, hi] = snapshot.timeRange;
    this.readout.textContent = `showing ${lo.toFixed(1)}s to ${hi.toFixed(1)}s`;
  }
}
