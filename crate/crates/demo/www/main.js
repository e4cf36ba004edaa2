import init, { density_profiles, mismatch_curve, family_gaps } from "./pkg/harmonic_trees_demo.js";

const COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];
const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function axes(ctx, w, h, pad) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(pad, pad);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad, h - pad);
  ctx.stroke();
}

// series: [{ys, color, dash}], x runs over indices starting at x0
function plot(canvas, series, { x0 = 0, ymin = 0, ymax = 1, log = false, bands = [] } = {}) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 28;
  axes(ctx, w, h, pad);
  const n = Math.max(...series.map((s) => s.ys.length));
  const fy = (y) => (log ? Math.log10(Math.max(y, 1e-300)) : y);
  const lo = fy(ymin), hi = fy(ymax);
  const px = (i) => pad + ((w - 2 * pad) * i) / Math.max(n - 1, 1);
  const py = (y) => h - pad - ((h - 2 * pad) * (fy(y) - lo)) / (hi - lo || 1);
  for (const b of bands) {
    ctx.fillStyle = b.color;
    ctx.fillRect(px(b.from - x0), pad, px(b.to - x0) - px(b.from - x0), h - 2 * pad);
  }
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.setLineDash(s.dash || []);
    ctx.beginPath();
    s.ys.forEach((y, i) => (i ? ctx.lineTo(px(i), py(y)) : ctx.moveTo(px(i), py(y))));
    ctx.stroke();
  }
  ctx.setLineDash([]);
  ctx.fillStyle = "#555";
  ctx.fillText(log ? `1e${hi.toFixed(0)}` : String(ymax), 2, pad + 4);
  ctx.fillText(log ? `1e${lo.toFixed(0)}` : String(ymin), 2, h - pad);
  ctx.fillText(String(x0), pad, h - 8);
  ctx.fillText(String(x0 + n - 1), w - pad - 10, h - 8);
}

function densities() {
  const v = JSON.parse(density_profiles(num("d-depth"), num("d-targets"), num("d-growth"), num("d-block")));
  for (const [key, id] of [["x", "d-x"], ["ufm", "d-u"]]) {
    const part = v[key];
    const bands = part.blocks.map((b) => ({ from: b.start, to: b.end, color: COLORS[b.target % COLORS.length] + "18" }));
    plot($(id), part.targets.map((t, i) => ({ ys: t.ratios, color: COLORS[i % COLORS.length] })), { x0: 1, bands });
  }
  $("d-legend").innerHTML = v.x.targets
    .map((t, i) => `<span style="color:${COLORS[i % COLORS.length]}">target ${t.target}: X upper ${t.upper.toFixed(3)}, U_FM lower ${v.ufm.targets[i].lower.toFixed(3)}</span>`)
    .join("");
}

function mismatch() {
  const v = JSON.parse(mismatch_curve(num("m-steps"), num("m-heavy")));
  const get = (k) => v.steps.map((s) => s[k]);
  const ys = get("mismatch").concat(get("halving")).filter((y) => y > 0);
  plot(
    $("m-plot"),
    [
      { ys: get("halving"), color: "#888", dash: [4, 3] },
      { ys: get("absorbing"), color: "#ff7f0e" },
      { ys: get("mismatch"), color: "#1f77b4" },
    ],
    { log: true, ymin: Math.min(...ys), ymax: Math.max(...ys) },
  );
}

function family() {
  const v = JSON.parse(family_gaps(num("f-members"), num("f-depth")));
  const rho = v.members.map((m) => m.rho);
  const lim = v.members.map((m) => m.limit);
  const all = rho.concat(lim).filter((y) => y > 0);
  plot(
    $("f-plot"),
    [
      { ys: lim, color: "#888", dash: [4, 3] },
      { ys: rho.map((y) => Math.max(y, Math.min(...all))), color: "#1f77b4" },
    ],
    { x0: 1, log: true, ymin: Math.min(...all), ymax: 1 },
  );
}

function guard(f) {
  return () => {
    $("status").textContent = "";
    try {
      f();
    } catch (e) {
      $("status").textContent = String(e);
      $("status").className = "err";
    }
  };
}

await init();
for (const [btn, f] of [["d-run", densities], ["m-run", mismatch], ["f-run", family]]) {
  $(btn).addEventListener("click", guard(f));
  guard(f)();
}
