import init, { Workbench } from "./pkg/vdsom_web.js";

const $ = (id) => document.getElementById(id);
const REACH = 300;
let bench = null;

const canvas = $("workspace");
const ctx = canvas.getContext("2d");
const scale = canvas.width / (2 * REACH);
const toPx = (x, y) => [canvas.width / 2 + x * scale, canvas.height / 2 - y * scale];
const toMm = (px, py) => [(px - canvas.width / 2) / scale, (canvas.height / 2 - py) / scale];

function dot(x, y, color, r) {
  const [px, py] = toPx(x, y);
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.arc(px, py, r, 0, 2 * Math.PI);
  ctx.fill();
}

function drawMap() {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!bench) return;
  const w = bench.sensory_weights();
  for (let i = 0; i < w.length; i += 2) dot(w[i], w[i + 1], "#4a78b0", 1.5);
}

$("train").onclick = () => {
  $("train-status").textContent = "Training...";
  setTimeout(() => {
    try {
      const start = performance.now();
      bench?.free();
      bench = new Workbench(+$("side").value, $("vdsom").checked, +$("iters").value, +$("seed").value);
      const secs = ((performance.now() - start) / 1000).toFixed(1);
      $("train-status").textContent = `Trained ${bench.side()}x${bench.side()} in ${secs} s, final distortion ${bench.final_zeta().toExponential(3)}`;
      drawMap();
    } catch (e) {
      $("train-status").textContent = `Error: ${e.message ?? e}`;
    }
  }, 0);
};

canvas.onclick = (ev) => {
  if (!bench) return;
  const rect = canvas.getBoundingClientRect();
  const [x, y] = toMm(ev.clientX - rect.left, ev.clientY - rect.top);
  try {
    const [t1, t2, rx, ry] = bench.inverse(x, y);
    drawMap();
    dot(x, y, "#c03030", 4);
    dot(rx, ry, "#20a040", 4);
    $("query-status").textContent =
      `target (${x.toFixed(1)}, ${y.toFixed(1)}) mm -> joints (${t1.toFixed(2)}, ${t2.toFixed(2)}) deg, ` +
      `reaches (${rx.toFixed(1)}, ${ry.toFixed(1)}) mm, miss ${Math.hypot(rx - x, ry - y).toFixed(2)} mm`;
  } catch (e) {
    $("query-status").textContent = `Error: ${e.message ?? e}`;
  }
};

$("forward").onclick = () => {
  if (!bench) return;
  try {
    const [px, py, tx, ty] = bench.forward(+$("t1").value, +$("t2").value);
    drawMap();
    dot(tx, ty, "#c03030", 4);
    dot(px, py, "#20a040", 4);
    $("query-status").textContent =
      `predicted (${px.toFixed(1)}, ${py.toFixed(1)}) mm, true (${tx.toFixed(1)}, ${ty.toFixed(1)}) mm, ` +
      `error ${Math.hypot(px - tx, py - ty).toFixed(2)} mm`;
  } catch (e) {
    $("query-status").textContent = `Error: ${e.message ?? e}`;
  }
};

$("perturb").onclick = () => {
  if (!bench) return;
  try {
    const zetas = bench.perturb_trace(+$("factor").value, +$("windows").value);
    const base = bench.final_zeta();
    const tc = $("trace").getContext("2d");
    const { width, height } = tc.canvas;
    tc.clearRect(0, 0, width, height);
    const top = Math.max(base, ...zetas) * 1.1;
    const y = (z) => height - (z / top) * height;
    tc.strokeStyle = "#999";
    tc.beginPath();
    tc.moveTo(0, y(base));
    tc.lineTo(width, y(base));
    tc.stroke();
    tc.strokeStyle = "#c03030";
    tc.beginPath();
    zetas.forEach((z, i) => {
      const x = zetas.length === 1 ? width / 2 : (i / (zetas.length - 1)) * width;
      i === 0 ? tc.moveTo(x, y(z)) : tc.lineTo(x, y(z));
    });
    tc.stroke();
    const ratio = zetas.reduce((a, b) => a + b, 0) / zetas.length / base;
    $("trace-status").textContent = `mean distortion after the change is ${ratio.toFixed(2)}x the trained level (grey line)`;
  } catch (e) {
    $("trace-status").textContent = `Error: ${e.message ?? e}`;
  }
};

await init();
$("train-status").textContent = "Ready.";
