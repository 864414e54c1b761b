import init, { fieldValue, decomposition, pathPoints, faceCells, momentTable } from "./pkg/masterfield_web.js";

const KMAX = 6;
const palette = ["#fde2a7", "#b9e4c9", "#c7d7f5", "#f5c7d9", "#e0d1f5", "#d5f0ee"];

const $ = (id) => document.getElementById(id);

function fillTable(id, rows) {
  const body = $(id).querySelector("tbody");
  body.replaceChildren(...rows.map(([a, b]) => {
    const tr = document.createElement("tr");
    for (const v of [a, b]) {
      const td = document.createElement("td");
      td.textContent = v;
      tr.appendChild(td);
    }
    return tr;
  }));
}

function draw(word) {
  const canvas = $("canvas");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const pts = pathPoints(word);
  const cells = faceCells(word);
  let xs = [0], ys = [0];
  for (let i = 0; i < pts.length; i += 2) { xs.push(pts[i]); ys.push(pts[i + 1]); }
  const minX = Math.min(...xs) - 1, maxX = Math.max(...xs) + 1;
  const minY = Math.min(...ys) - 1, maxY = Math.max(...ys) + 1;
  const unit = Math.min(canvas.width / (maxX - minX), canvas.height / (maxY - minY));
  const px = (x) => (x - minX) * unit;
  const py = (y) => canvas.height - (y - minY) * unit;

  for (let i = 0; i < cells.length; i += 3) {
    ctx.fillStyle = palette[cells[i] % palette.length];
    ctx.fillRect(px(cells[i + 1]), py(cells[i + 2] + 1), unit, unit);
  }
  ctx.strokeStyle = "#333";
  ctx.lineWidth = 3;
  ctx.beginPath();
  ctx.moveTo(px(pts[0]), py(pts[1]));
  for (let i = 2; i < pts.length; i += 2) ctx.lineTo(px(pts[i]), py(pts[i + 1]));
  ctx.stroke();
  ctx.fillStyle = "#c00";
  ctx.beginPath();
  ctx.arc(px(0), py(0), 5, 0, 2 * Math.PI);
  ctx.fill();
}

function updateLoop() {
  const word = $("loop").value.trim().toUpperCase();
  const scale = parseFloat($("tscale").value);
  const product = $("product").value;
  try {
    draw(word);
    $("decomposition").textContent = decomposition(word);
    const rows = [];
    for (let k = 1; k <= KMAX; k++) rows.push([k, fieldValue(word, k, scale, product).toFixed(12)]);
    fillTable("values", rows);
    $("loop-error").textContent = "";
  } catch (e) {
    $("loop-error").textContent = e.message ?? String(e);
  }
}

function updateMoments() {
  const t = parseFloat($("time").value);
  $("time-label").textContent = t.toFixed(2);
  const m = momentTable(t, 10);
  fillTable("moments", Array.from(m, (v, k) => [k, v.toFixed(12)]));
}

await init();
for (const id of ["loop", "tscale", "product"]) $(id).addEventListener("input", updateLoop);
$("time").addEventListener("input", updateMoments);
updateLoop();
updateMoments();
