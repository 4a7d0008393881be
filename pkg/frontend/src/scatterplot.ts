/** Testcases scatterplot: one point per testcase, positioned by the 2D
 * embedding of its coverage vector and colored by owning fuzzer.
 *
 * Dragging brushes a rectangular selection that propagates to the other
 * views; the wheel zooms with both axes rescaled; double-click resets.
 */

import * as d3 from "d3";
import { SelectionStore, keyOf, type TcKey } from "./state";
import type { EmbeddingPoint } from "./types";

const MARGIN = { top: 10, right: 10, bottom: 24, left: 36 };

export class ScatterplotView {
  private svg: d3.Selection<SVGSVGElement, unknown, null, undefined>;
  private pointsLayer: d3.Selection<SVGGElement, unknown, null, undefined>;
  private xScale: d3.ScaleLinear<number, number>;
  private yScale: d3.ScaleLinear<number, number>;
  private zoomedX: d3.ScaleLinear<number, number>;
  private zoomedY: d3.ScaleLinear<number, number>;
  private xAxisG: d3.Selection<SVGGElement, unknown, null, undefined>;
  private yAxisG: d3.Selection<SVGGElement, unknown, null, undefined>;
  private plotWidth: number;
  private plotHeight: number;

  constructor(
    container: HTMLElement,
    private store: SelectionStore,
    private points: EmbeddingPoint[],
    private colorOf: (fuzzer: string) => string,
    private timeOf: (key: TcKey) => number,
    width = 460,
    height = 360,
  ) {
    this.plotWidth = width - MARGIN.left - MARGIN.right;
    this.plotHeight = height - MARGIN.top - MARGIN.bottom;

    this.svg = d3
      .select(container)
      .append("svg")
      .attr("class", "scatterplot")
      .attr("viewBox", `0 0 ${width} ${height}`);
    const root = this.svg
      .append("g")
      .attr("transform", `translate(${MARGIN.left},${MARGIN.top})`);

    const xs = points.map((p) => p.x);
    const ys = points.map((p) => p.y);
    const pad = (lo: number, hi: number) => {
      const span = hi - lo || 1;
      return [lo - 0.05 * span, hi + 0.05 * span] as [number, number];
    };
    this.xScale = d3
      .scaleLinear()
      .domain(points.length ? pad(Math.min(...xs), Math.max(...xs)) : [0, 1])
      .range([0, this.plotWidth]);
    this.yScale = d3
      .scaleLinear()
      .domain(points.length ? pad(Math.min(...ys), Math.max(...ys)) : [0, 1])
      .range([this.plotHeight, 0]);
    this.zoomedX = this.xScale;
    this.zoomedY = this.yScale;

    this.xAxisG = root
      .append("g")
      .attr("class", "axis x")
      .attr("transform", `translate(0,${this.plotHeight})`);
    this.yAxisG = root.append("g").attr("class", "axis y");

    const brush = d3
      .brush()
      .extent([
        [0, 0],
        [this.plotWidth, this.plotHeight],
      ])
      .on("end", (event: d3.D3BrushEvent<unknown>) => this.onBrushEnd(event));
    root.append("g").attr("class", "brush").call(brush);

    this.pointsLayer = root.append("g").attr("class", "points");

    if (points.length === 0) {
      root
        .append("text")
        .attr("class", "placeholder")
        .attr("x", this.plotWidth / 2)
        .attr("y", this.plotHeight / 2)
        .attr("text-anchor", "middle")
        .text("no embedding available");
    }

    const zoom = d3
      .zoom<SVGSVGElement, unknown>()
      .scaleExtent([0.2, 50])
      // The drag gesture belongs to the brush; zoom listens to the wheel.
      .filter((event: Event) => event.type === "wheel" || event.type === "dblclick")
      .on("zoom", (event: d3.D3ZoomEvent<SVGSVGElement, unknown>) => {
        this.zoomedX = event.transform.rescaleX(this.xScale);
        this.zoomedY = event.transform.rescaleY(this.yScale);
        this.redraw();
      });
    this.svg.call(zoom);

    this.drawPoints();
    this.redraw();
    this.applyState();
    store.subscribe(() => this.applyState());
  }

  private drawPoints(): void {
    this.pointsLayer
      .selectAll<SVGCircleElement, EmbeddingPoint>("circle.point")
      .data(this.points, (p) => keyOf(p.fuzzer, p.id))
      .join("circle")
      .attr("class", "point")
      .attr("data-key", (p) => keyOf(p.fuzzer, p.id))
      .attr("data-fuzzer", (p) => p.fuzzer)
      .attr("r", 4)
      .attr("fill", (p) => this.colorOf(p.fuzzer))
      .on("click", (_event: MouseEvent, p: EmbeddingPoint) => {
        this.store.toggleSelected(keyOf(p.fuzzer, p.id));
      });
  }

  private redraw(): void {
    this.xAxisG.call(d3.axisBottom(this.zoomedX).ticks(6) as never);
    this.yAxisG.call(d3.axisLeft(this.zoomedY).ticks(6) as never);
    this.pointsLayer
      .selectAll<SVGCircleElement, EmbeddingPoint>("circle.point")
      .attr("cx", (p) => this.zoomedX(p.x))
      .attr("cy", (p) => this.zoomedY(p.y));
  }

  private onBrushEnd(event: d3.D3BrushEvent<unknown>): void {
    if (!event.selection) {
      // sourceEvent is absent for programmatic moves (brush.clear below).
      if (event.sourceEvent) this.store.clearSelection();
      return;
    }
    const [[px0, py0], [px1, py1]] = event.selection as [
      [number, number],
      [number, number],
    ];
    const x0 = this.zoomedX.invert(px0);
    const x1 = this.zoomedX.invert(px1);
    const y0 = this.zoomedY.invert(py1); // pixel y grows downward
    const y1 = this.zoomedY.invert(py0);
    this.selectWithin([x0, y0], [x1, y1]);
  }

  /** Select every visible point inside a data-coordinate rectangle. */
  applyBrush(lower: [number, number], upper: [number, number]): void {
    this.selectWithin(lower, upper);
  }

  private selectWithin(lower: [number, number], upper: [number, number]): void {
    const keys = this.points
      .filter(
        (p) =>
          p.x >= lower[0] &&
          p.x <= upper[0] &&
          p.y >= lower[1] &&
          p.y <= upper[1] &&
          this.store.isVisibleKey(keyOf(p.fuzzer, p.id)),
      )
      .map((p) => keyOf(p.fuzzer, p.id));
    this.store.setSelection(keys);
  }

  private applyState(): void {
    const snapshot = this.store.snapshot();
    this.pointsLayer
      .selectAll<SVGCircleElement, EmbeddingPoint>("circle.point")
      .classed("sel", (p) => snapshot.selected.has(keyOf(p.fuzzer, p.id)))
      .style("display", (p) => {
        const key = keyOf(p.fuzzer, p.id);
        const time = this.timeOf(key);
        const visible =
          snapshot.visibleFuzzers.has(p.fuzzer) &&
          time >= snapshot.timeRange[0] &&
          time <= snapshot.timeRange[1];
        return visible ? null : "none";
      });
  }
}
