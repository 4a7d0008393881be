/** Generations graph: one fuzzer's testcase-derivation DAG as a hierarchical
 * layout. The first parent of each testcase is its layout parent; second
 * (splice) parents are drawn as dashed extra links. A compare fuzzer fills
 * the nodes it finds interesting; the current selection borders its nodes;
 * hovering a node lowlights everything except the node and its neighbors.
 */

import * as d3 from "d3";
import { SelectionStore, keyOf } from "./state";
import type { GraphPayload, TestcaseInfo } from "./types";

interface DisplayNode {
  id: number;
  time: number;
  op: string | null;
  layoutParent: number | null;
  x: number;
  y: number;
}

const NODE_RADIUS = 10;

export class GenerationsView {
  private svg: d3.Selection<SVGSVGElement, unknown, null, undefined>;
  private canvas: d3.Selection<SVGGElement, unknown, null, undefined>;
  private notice: HTMLElement;
  private ownerSelect: HTMLSelectElement;
  private owner: string;
  private hovered: number | null = null;
  private displayed = new Map<number, DisplayNode>();

  constructor(
    container: HTMLElement,
    private store: SelectionStore,
    private graphs: Map<string, GraphPayload>,
    private testcases: Record<string, TestcaseInfo[]>,
    private interestingness: Record<string, Record<string, string[]>>,
    private colorOf: (fuzzer: string) => string,
    fuzzerIds: string[],
    width = 460,
    height = 380,
  ) {
    this.owner = fuzzerIds[0] ?? "";

    const header = document.createElement("div");
    header.className = "graph-header";
    const label = document.createElement("label");
    label.textContent = "graph ";
    this.ownerSelect = document.createElement("select");
    this.ownerSelect.className = "graph-owner";
    for (const fuzzer of fuzzerIds) {
      const option = document.createElement("option");
      option.value = fuzzer;
      option.textContent = fuzzer;
      this.ownerSelect.appendChild(option);
    }
    this.ownerSelect.addEventListener("change", () => {
      this.setOwner(this.ownerSelect.value);
    });
    label.appendChild(this.ownerSelect);
    header.appendChild(label);
    this.notice = document.createElement("span");
    this.notice.className = "graph-notice";
    header.appendChild(this.notice);
    container.appendChild(header);

    this.svg = d3
      .select(container)
      .append("svg")
      .attr("class", "generations")
      .attr("viewBox", `0 0 ${width} ${height}`);
    this.canvas = this.svg.append("g").attr("transform", `translate(${width / 2},24)`);

    const zoom = d3
      .zoom<SVGSVGElement, unknown>()
      .scaleExtent([0.2, 8])
      .on("zoom", (event: d3.D3ZoomEvent<SVGSVGElement, unknown>) => {
        this.canvas.attr(
          "transform",
          `translate(${width / 2 + event.transform.x},${24 + event.transform.y})` +
            ` scale(${event.transform.k})`,
        );
      });
    this.svg.call(zoom);

    this.render();
    store.subscribe(() => this.render());
  }

  setOwner(fuzzer: string): void {
    this.owner = fuzzer;
    this.ownerSelect.value = fuzzer;
    this.hovered = null;
    this.render();
  }

  currentOwner(): string {
    return this.owner;
  }

  /** Programmatic equivalents of the pointer interactions. */
  clickNode(id: number): void {
    this.store.toggleSelected(keyOf(this.owner, id));
  }

  hoverNode(id: number | null): void {
    this.hovered = id;
    this.applyClasses();
  }

  private visibleNodes(): DisplayNode[] {
    const snapshot = this.store.snapshot();
    const graph = this.graphs.get(this.owner);
    if (!graph || !snapshot.visibleFuzzers.has(this.owner)) return [];
    const [lo, hi] = snapshot.timeRange;
    const within = graph.nodes.filter((n) => n.time >= lo && n.time <= hi);
    const present = new Set(within.map((n) => n.id));
    const parentsOf = new Map<number, number[]>(
      (this.testcases[this.owner] ?? []).map((tc) => [tc.id, tc.parents]),
    );
    return within.map((n) => {
      const parents = (parentsOf.get(n.id) ?? []).filter((p) => present.has(p));
      return {
        id: n.id,
        time: n.time,
        op: n.op,
        layoutParent: parents.length ? parents[0] : null,
        x: 0,
        y: 0,
      };
    });
  }

  private render(): void {
    const snapshot = this.store.snapshot();
    const nodes = this.visibleNodes();
    this.displayed = new Map(nodes.map((n) => [n.id, n]));

    if (!snapshot.visibleFuzzers.has(this.owner)) {
      this.notice.textContent = `${this.owner} is hidden by the filter panel`;
    } else if (snapshot.compareFuzzer === this.owner) {
      this.notice.textContent = "overlay disabled: compare fuzzer owns this graph";
    } else {
      this.notice.textContent = "";
    }

    // Hierarchical layout over first-parent edges, multiple roots hung off a
    // synthetic invisible root.
    type Datum = { id: number | null; parent: number | null };
    const data: Datum[] = [{ id: null, parent: null } as unknown as Datum];
    for (const n of nodes) data.push({ id: n.id, parent: n.layoutParent });
    const root = d3
      .stratify<Datum>()
      .id((d) => (d.id === null ? "root" : String(d.id)))
      .parentId((d) => (d.id === null ? null : d.parent === null ? "root" : String(d.parent)))(
      data,
    );
    d3.tree<Datum>().nodeSize([26, 64])(root);
    for (const descendant of root.descendants()) {
      if (descendant.data.id === null) continue;
      const node = this.displayed.get(descendant.data.id)!;
      node.x = descendant.x ?? 0;
      node.y = ((descendant.depth ?? 1) - 1) * 64;
    }

    const treeLinks: [DisplayNode, DisplayNode][] = [];
    const spliceLinks: [DisplayNode, DisplayNode][] = [];
    const graph = this.graphs.get(this.owner);
    if (graph && snapshot.visibleFuzzers.has(this.owner)) {
      for (const [parent, child] of graph.edges) {
        const from = this.displayed.get(parent);
        const to = this.displayed.get(child);
        if (!from || !to) continue;
        if (to.layoutParent === parent) treeLinks.push([from, to]);
        else spliceLinks.push([from, to]);
      }
    }

    this.canvas
      .selectAll<SVGPathElement, [DisplayNode, DisplayNode]>("path.tree-link")
      .data(treeLinks, (d) => `${d[0].id}-${d[1].id}`)
      .join("path")
      .attr("class", "tree-link")
      .attr("data-edge", (d) => `${d[0].id}-${d[1].id}`)
      .attr("d", (d) => this.linkPath(d[0], d[1]));

    this.canvas
      .selectAll<SVGPathElement, [DisplayNode, DisplayNode]>("path.splice-link")
      .data(spliceLinks, (d) => `${d[0].id}-${d[1].id}`)
      .join("path")
      .attr("class", "splice-link")
      .attr("data-edge", (d) => `${d[0].id}-${d[1].id}`)
      .attr("d", (d) => this.linkPath(d[0], d[1]));

    const view = this;
    const groups = this.canvas
      .selectAll<SVGGElement, DisplayNode>("g.gnode")
      .data(nodes, (d) => d.id)
      .join((enter) => {
        const g = enter.append("g").attr("class", "gnode");
        g.append("circle").attr("r", NODE_RADIUS);
        g.append("text")
          .attr("class", "gnode-label")
          .attr("text-anchor", "middle")
          .attr("dy", "0.32em");
        g.append("title");
        g.on("click", function (_event: MouseEvent, d: DisplayNode) {
          view.clickNode(d.id);
        });
        g.on("mouseenter", function (_event: MouseEvent, d: DisplayNode) {
          view.hoverNode(d.id);
        });
        g.on("mouseleave", function () {
          view.hoverNode(null);
        });
        return g;
      })
      .attr("data-id", (d) => d.id)
      .attr("transform", (d) => `translate(${d.x},${d.y})`);
    groups.select("circle").attr("stroke", this.colorOf(this.owner));
    groups.select("text.gnode-label").text((d) => d.id);
    groups
      .select("title")
      .text((d) => `#${d.id} t=${d.time.toFixed(3)}s${d.op ? ` op=${d.op}` : ""}`);

    this.applyClasses();
  }

  /** The ids the compare overlay fills, per the interestingness map. */
  overlaySet(): Set<number> {
    const snapshot = this.store.snapshot();
    const compare = snapshot.compareFuzzer;
    if (!compare || compare === this.owner) return new Set();
    const rows = this.interestingness[this.owner] ?? {};
    const filled = new Set<number>();
    for (const id of this.displayed.keys()) {
      if ((rows[String(id)] ?? []).includes(compare)) filled.add(id);
    }
    return filled;
  }

  private neighborhood(id: number): Set<number> {
    const keep = new Set([id]);
    const graph = this.graphs.get(this.owner);
    if (!graph) return keep;
    for (const [parent, child] of graph.edges) {
      if (parent === id && this.displayed.has(child)) keep.add(child);
      if (child === id && this.displayed.has(parent)) keep.add(parent);
    }
    return keep;
  }

  private applyClasses(): void {
    const snapshot = this.store.snapshot();
    const filled = this.overlaySet();
    const hovered = this.hovered;
    const neighborhood =
      hovered !== null && this.displayed.has(hovered)
        ? this.neighborhood(hovered)
        : null;
    this.canvas
      .selectAll<SVGGElement, DisplayNode>("g.gnode")
      .classed("filled", (d) => filled.has(d.id))
      .classed("bordered", (d) => snapshot.selected.has(keyOf(this.owner, d.id)))
      .classed("lowlight", (d) => neighborhood !== null && !neighborhood.has(d.id));
    this.canvas
      .selectAll<SVGPathElement, [DisplayNode, DisplayNode]>("path.tree-link, path.splice-link")
      .classed(
        "lowlight",
        (d) =>
          neighborhood !== null && !(neighborhood.has(d[0].id) && neighborhood.has(d[1].id)),
      );
  }

  private linkPath(from: DisplayNode, to: DisplayNode): string {
    const midY = (from.y + to.y) / 2;
    return `M${from.x},${from.y}C${from.x},${midY} ${to.x},${midY} ${to.x},${to.y}`;
  }
}
