import init, { demoNodes, equilibriumCurve, optimizeWall, simulate } from "./pkg/sabatier_web.js";

const COLS = 9;
const X = 0, T = 3, Y_CO2 = 4, Y_H2 = 5, Y_CH4 = 6, Y_H2O = 7, CONV = 8;
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"];

const $ = (id) => document.getElementById(id);

function column(packed, c) {
  const n = packed.length / COLS;
  const out = new Float64Array(n);
  for (let i = 0; i < n; i++) out[i] = packed[i * COLS + c];
  return out;
}

function range(values) {
  let lo = Infinity, hi = -Infinity;
  for (const v of values) { if (v < lo) lo = v; if (v > hi) hi = v; }
  if (hi - lo < 1e-12) { lo -= 0.5; hi += 0.5; }
  return [lo, hi];
}

// series: [{x, y, label, axis: "left" | "right"}]
function plot(canvas, series, xLabel, leftLabel, rightLabel) {
  const dpr = window.devicePixelRatio || 1;
  const w = canvas.clientWidth, h = canvas.clientHeight;
  canvas.width = w * dpr;
  canvas.height = h * dpr;
  const g = canvas.getContext("2d");
  g.scale(dpr, dpr);
  g.clearRect(0, 0, w, h);
  g.font = "12px system-ui, sans-serif";
  const m = { l: 58, r: rightLabel ? 58 : 16, t: 12, b: 40 };
  const pw = w - m.l - m.r, ph = h - m.t - m.b;

  const xr = range(series.flatMap((s) => Array.from(s.x)));
  const yr = {};
  for (const axis of ["left", "right"]) {
    const ys = series.filter((s) => (s.axis || "left") === axis).flatMap((s) => Array.from(s.y));
    if (ys.length) yr[axis] = range(ys);
  }
  const sx = (v) => m.l + ((v - xr[0]) / (xr[1] - xr[0])) * pw;
  const sy = (v, axis) => m.t + ph - ((v - yr[axis][0]) / (yr[axis][1] - yr[axis][0])) * ph;

  g.strokeStyle = "#999";
  g.strokeRect(m.l, m.t, pw, ph);
  g.fillStyle = "#444";
  g.textAlign = "center";
  for (let k = 0; k <= 4; k++) {
    const v = xr[0] + (k / 4) * (xr[1] - xr[0]);
    g.fillText(+v.toPrecision(3), sx(v), m.t + ph + 15);
  }
  g.fillText(xLabel, m.l + pw / 2, h - 6);
  for (const [axis, label, x, align] of [["left", leftLabel, m.l - 5, "right"], ["right", rightLabel, m.l + pw + 5, "left"]]) {
    if (!yr[axis]) continue;
    g.textAlign = align;
    for (let k = 0; k <= 4; k++) {
      const v = yr[axis][0] + (k / 4) * (yr[axis][1] - yr[axis][0]);
      g.fillText(+v.toPrecision(3), x, sy(v, axis) + 4);
    }
    g.save();
    g.translate(axis === "left" ? 12 : w - 6, m.t + ph / 2);
    g.rotate(-Math.PI / 2);
    g.textAlign = "center";
    g.fillText(label, 0, 0);
    g.restore();
  }

  series.forEach((s, k) => {
    const axis = s.axis || "left";
    g.strokeStyle = s.color || COLORS[k % COLORS.length];
    g.lineWidth = 1.8;
    g.setLineDash(axis === "right" ? [5, 3] : []);
    g.beginPath();
    for (let i = 0; i < s.x.length; i++) {
      const px = sx(s.x[i]), py = sy(s.y[i], axis);
      i ? g.lineTo(px, py) : g.moveTo(px, py);
    }
    g.stroke();
    g.setLineDash([]);
    g.fillStyle = g.strokeStyle;
    g.textAlign = "left";
    g.fillText(s.label, m.l + 8 + 110 * k, m.t + 14);
  });
}

function guarded(outId, fn) {
  return () => {
    const out = $(outId);
    out.classList.remove("err");
    out.textContent = "working…";
    // let the status paint before the solver blocks the thread
    setTimeout(() => {
      try {
        const t0 = performance.now();
        const text = fn();
        out.textContent = `${text}\n(${Math.round(performance.now() - t0)} ms)`;
      } catch (e) {
        out.classList.add("err");
        out.textContent = String(e.message || e);
      }
    }, 10);
  };
}

function runEquilibrium() {
  const pressures = $("eq-p").value.split(",").map(Number).filter((p) => p > 0);
  const tmin = +$("eq-tmin").value, tmax = +$("eq-tmax").value, n = 91;
  const t = Float64Array.from({ length: n }, (_, i) => tmin + ((tmax - tmin) * i) / (n - 1));
  const series = pressures.map((p) => ({ x: t, y: equilibriumCurve(tmin, tmax, n, p), label: `${p} bar` }));
  plot($("eq-plot"), series, "temperature [°C]", "equilibrium CO₂ conversion");
  return series.map((s) => `${s.label}: ${s.y[0].toFixed(4)} at ${tmin} °C, ${s.y[n - 1].toFixed(4)} at ${tmax} °C`).join("\n");
}

function profileSeries(packed, wallNodal) {
  const x = column(packed, X).map((v) => v * 1e3);
  const series = [
    { x, y: column(packed, Y_CO2), label: "Y CO₂" },
    { x, y: column(packed, Y_H2), label: "Y H₂" },
    { x, y: column(packed, Y_CH4), label: "Y CH₄" },
    { x, y: column(packed, Y_H2O), label: "Y H₂O" },
    { x, y: column(packed, T).map((v) => v - 273.15), label: "T gas", axis: "right", color: "#555" },
  ];
  if (wallNodal) series.push({ x, y: wallNodal, label: "T wall", axis: "right", color: "#000" });
  return series;
}

function runSimulate() {
  const flow = +$("sim-flow").value, tw = +$("sim-t").value;
  const p = simulate(flow, tw);
  plot($("sim-plot"), profileSeries(p), "x [mm]", "mass fraction", "temperature [°C]");
  const n = p.length / COLS;
  const tMax = Math.max(...column(p, T)) - 273.15;
  return `outlet CO₂ conversion ${p[(n - 1) * COLS + CONV].toFixed(5)}, hottest gas ${tMax.toFixed(2)} °C`;
}

function runOptimize() {
  const flow = +$("opt-flow").value, layout = $("opt-layout").value;
  const r = optimizeWall(flow, layout);
  plot($("opt-plot"), profileSeries(r.profile, r.wallNodalC), "x [mm]", "mass fraction", "temperature [°C]");
  const wall = Array.from(r.wallC);
  const shown = wall.length <= 3
    ? wall.map((v) => v.toFixed(2)).join(", ") + " °C"
    : `${wall[0].toFixed(1)} °C at the inlet to ${wall[wall.length - 1].toFixed(1)} °C at the outlet`;
  return `wall ${shown}\nconversion ${r.conversion.toFixed(5)} after ${r.iterations} iterations`;
}

await init();
$("nodes").textContent = demoNodes();
$("eq-run").onclick = guarded("eq-out", runEquilibrium);
$("sim-run").onclick = guarded("sim-out", runSimulate);
$("opt-run").onclick = guarded("opt-out", runOptimize);
$("eq-run").click();
$("sim-run").click();
