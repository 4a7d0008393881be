/** New interesting testcases plot: how many testcases each fuzzer saved in
 * each second, linear axes, same selection marks as the coverage plot.
 */

import * as d3 from "d3";
import { SelectionStore } from "./state";
import { TimePlot, type Series } from "./timeplot";

export class InterestingPlotView extends TimePlot {
  protected yScale: d3.ScaleLinear<number, number>;

  constructor(
    container: HTMLElement,
    store: SelectionStore,
    histogram: Record<string, Record<string, number>>,
    colorOf: (fuzzer: string) => string,
  ) {
    const series: Series = new Map(
      Object.entries(histogram).map(([fuzzer, buckets]) => [
        fuzzer,
        Object.entries(buckets)
          .map(([second, count]) => [Number(second), count] as [number, number])
          .sort((a, b) => a[0] - b[0]),
      ]),
    );
    super(container, "interesting-plot", store, series, colorOf);
    const counts = [...series.values()].flat().map((p) => p[1]);
    const highest = counts.length ? Math.max(...counts) : 1;
    // Zero pinned at the bottom.
    this.yScale = d3.scaleLinear().domain([0, highest]).range([this.plotHeight, 0]);
    this.start();
  }

  protected makeYAxis(): d3.Axis<d3.NumberValue> {
    return d3.axisLeft(this.yScale).ticks(5);
  }
}
