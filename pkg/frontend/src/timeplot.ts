/** Shared machinery for the two time plots (coverage growth and new
 * interesting testcases): per-fuzzer step series over time, vertical lines
 * marking the selection's discovery times, and wheel zoom/pan that rescales
 * the time axis while the lowest value stays pinned at the bottom.
 */

import * as d3 from "d3";
import { SelectionStore, keyOf } from "./state";

const MARGIN = { top: 10, right: 12, bottom: 24, left: 44 };

export type Series = Map<string, [number, number][]>;

export abstract class TimePlot {
  protected svg: d3.Selection<SVGSVGElement, unknown, null, undefined>;
  protected linesLayer: d3.Selection<SVGGElement, unknown, null, undefined>;
  protected marksLayer: d3.Selection<SVGGElement, unknown, null, undefined>;
  protected xScale: d3.ScaleLinear<number, number>;
  protected zoomedX: d3.ScaleLinear<number, number>;
  protected abstract yScale: d3.ScaleContinuousNumeric<number, number>;
  private xAxisG: d3.Selection<SVGGElement, unknown, null, undefined>;
  private yAxisG: d3.Selection<SVGGElement, unknown, null, undefined>;
  protected plotWidth: number;
  protected plotHeight: number;

  constructor(
    container: HTMLElement,
    cssClass: string,
    protected store: SelectionStore,
    protected series: Series,
    protected colorOf: (fuzzer: string) => string,
    width = 460,
    height = 260,
  ) {
    this.plotWidth = width - MARGIN.left - MARGIN.right;
    this.plotHeight = height - MARGIN.top - MARGIN.bottom;
    this.svg = d3
      .select(container)
      .append("svg")
      .attr("class", cssClass)
      .attr("viewBox", `0 0 ${width} ${height}`);
    const root = this.svg
      .append("g")
      .attr("transform", `translate(${MARGIN.left},${MARGIN.top})`);
    this.xScale = d3.scaleLinear().domain([0, store.horizon || 1]).range([0, this.plotWidth]);
    this.zoomedX = this.xScale;
    this.xAxisG = root
      .append("g")
      .attr("class", "axis x")
      .attr("transform", `translate(0,${this.plotHeight})`);
    this.yAxisG = root.append("g").attr("class", "axis y");
    this.linesLayer = root.append("g").attr("class", "lines");
    this.marksLayer = root.append("g").attr("class", "marks");

    const zoom = d3
      .zoom<SVGSVGElement, unknown>()
      .scaleExtent([1, 60])
      .translateExtent([
        [0, 0],
        [this.plotWidth, this.plotHeight],
      ])
      .on("zoom", (event: d3.D3ZoomEvent<SVGSVGElement, unknown>) => {
        this.zoomedX = event.transform.rescaleX(this.xScale);
        this.update();
      });
    this.svg.call(zoom);
  }

  /** Finish construction once the subclass has its y scale ready. */
  protected start(): void {
    this.update();
    this.store.subscribe(() => this.update());
  }

  protected visibleWindow(): [number, number] {
    const [lo, hi] = this.store.snapshot().timeRange;
    return [lo, hi];
  }

  protected update(): void {
    const snapshot = this.store.snapshot();
    const [lo, hi] = snapshot.timeRange;
    this.xAxisG.call(d3.axisBottom(this.zoomedX).ticks(6) as never);
    this.yAxisG.call(this.makeYAxis() as never);

    const line = d3
      .line<[number, number]>()
      .x((p) => this.zoomedX(p[0]))
      .y((p) => this.yScale(p[1]))
      .curve(d3.curveStepAfter);

    const visible = [...this.series.entries()].filter(([fuzzer]) =>
      snapshot.visibleFuzzers.has(fuzzer),
    );
    this.linesLayer
      .selectAll<SVGPathElement, [string, [number, number][]]>("path.series")
      .data(visible, (d) => d[0])
      .join("path")
      .attr("class", "series")
      .attr("data-fuzzer", (d) => d[0])
      .attr("fill", "none")
      .attr("stroke", (d) => this.colorOf(d[0]))
      .attr("stroke-width", 1.5)
      .attr("d", (d) => {
        const clipped = this.clipSeries(d[1], lo, hi);
        return clipped.length ? line(clipped) : null;
      });

    const marks = this.store
      .selectedTestcases()
      .filter((tc) => snapshot.visibleFuzzers.has(tc.fuzzer));
    this.marksLayer
      .selectAll<SVGLineElement, { fuzzer: string; id: number; time: number }>(
        "line.selline",
      )
      .data(marks, (tc) => keyOf(tc.fuzzer, tc.id))
      .join("line")
      .attr("class", "selline")
      .attr("data-key", (tc) => keyOf(tc.fuzzer, tc.id))
      .attr("stroke", (tc) => this.colorOf(tc.fuzzer))
      .attr("y1", 0)
      .attr("y2", this.plotHeight)
      .attr("x1", (tc) => this.zoomedX(tc.time))
      .attr("x2", (tc) => this.zoomedX(tc.time));
  }

  /** Truncate a step series to [lo, hi], holding the last value at hi. */
  private clipSeries(
    points: [number, number][],
    lo: number,
    hi: number,
  ): [number, number][] {
    const within = points.filter((p) => p[0] >= lo && p[0] <= hi);
    if (within.length === 0) return [];
    const last = within[within.length - 1];
    if (last[0] < hi) within.push([hi, last[1]]);
    return within;
  }

  protected abstract makeYAxis(): d3.Axis<d3.NumberValue>;
}
