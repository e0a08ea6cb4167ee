/**
 * Server-side rendering of figure models to SVG (default) or PNG.
 */
import * as echarts from "echarts";
import { Resvg } from "@resvg/resvg-js";

import type { ConsumptionFigure, Figure, ObjectiveFigure, Series } from "./figures.js";

export interface RenderOptions {
  width?: number;
  height?: number;
}

const PALETTE = [
  "#c23531", "#2f4554", "#61a0a8", "#d48265", "#91c7ae",
  "#749f83", "#ca8622", "#bda29a", "#6e7074", "#546570",
];

function lineSeries(series: Series, axisIndex: number) {
  return {
    name: series.label,
    type: "line" as const,
    xAxisIndex: axisIndex,
    yAxisIndex: axisIndex,
    symbol: "circle",
    symbolSize: 5,
    data: series.x.map((x, i) => [x, series.y[i]]),
  };
}

function consumptionOption(fig: ConsumptionFigure) {
  const lefts = ["6%", "39.5%", "73%"];
  return {
    animation: false,
    color: PALETTE,
    legend: { top: 4, type: "scroll" as const },
    grid: fig.panels.map((_, i) => ({
      left: lefts[i],
      width: "23%",
      top: 70,
      bottom: 50,
      containLabel: false,
    })),
    xAxis: fig.panels.map((_, i) => ({
      gridIndex: i,
      type: "value" as const,
      name: fig.xLabel,
      nameLocation: "middle" as const,
      nameGap: 28,
    })),
    yAxis: fig.panels.map((panel, i) => ({
      gridIndex: i,
      type: "value" as const,
      name: panel.axisLabel,
      nameLocation: "middle" as const,
      nameGap: 55,
      scale: true,
    })),
    series: fig.panels.flatMap((panel, i) =>
      panel.series.map((s) => lineSeries(s, i)),
    ),
  };
}

function objectiveOption(fig: ObjectiveFigure) {
  return {
    animation: false,
    color: PALETTE,
    legend: { top: 4 },
    grid: { left: 80, right: 30, top: 60, bottom: 50 },
    xAxis: {
      type: "value" as const,
      name: fig.xLabel,
      nameLocation: "middle" as const,
      nameGap: 28,
    },
    yAxis: {
      type: "value" as const,
      name: fig.yLabel,
      nameLocation: "middle" as const,
      nameGap: 55,
      scale: true,
    },
    series: fig.series.map((s) => lineSeries(s, 0)),
  };
}

export function renderFigureSvg(fig: Figure, opts: RenderOptions = {}): string {
  const width = opts.width ?? (fig.kind === "consumption-panels" ? 1500 : 640);
  const height = opts.height ?? 420;
  const chart = echarts.init(null, null, { renderer: "svg", ssr: true, width, height });
  try {
    chart.setOption(
      fig.kind === "consumption-panels" ? consumptionOption(fig) : objectiveOption(fig),
    );
    return chart.renderToSVGString();
  } finally {
    chart.dispose();
  }
}

export function renderFigurePng(fig: Figure, opts: RenderOptions = {}): Buffer {
  const svg = renderFigureSvg(fig, opts);
  return new Resvg(svg, { background: "white" }).render().asPng();
}
