/** Wires the DOM to the API client, draft controller, and 3-D scene.
 *
 * Workflow: upload a mesh, toggle pick mode, click a point, drag to set
 * the radius while the preview recolors live, tune λ, commit, download
 * the CSV.  Camera drag orbits when pick mode is off.
 */

import * as THREE from "three";

import { GoniometerApi, MeasurementRecord } from "./api.js";
import { DraftController, errorHint, formatFit, formatTheta } from "./state.js";
import { ViewerScene, applyLabels, clearColors } from "./viewer.js";

const $ = <T extends HTMLElement>(id: string): T =>
  document.getElementById(id) as T;

const api = new GoniometerApi("");
const canvas = $<HTMLCanvasElement>("viewport");
const scene = new ViewerScene(canvas);

let meshId: string | null = null;
let draft: DraftController | null = null;
let records: MeasurementRecord[] = [];
let pickMode = true;
let dragging = false;
let orbiting = false;
let lastPointer = { x: 0, y: 0 };

function setStatus(text: string, isError = false): void {
  const el = $("status");
  el.textContent = text;
  el.classList.toggle("error", isError);
}

function showPreview(): void {
  const preview = draft?.draft.preview;
  if (!preview) return;
  $("theta").textContent = formatTheta(preview.theta_deg);
  $("fit").textContent = formatFit(preview.fit);
  $("counts").textContent = `${preview.n_plus} / ${preview.n_minus}`;
  if (scene.mesh) {
    clearColors(scene.mesh.geometry);
    repaintRecords();
    applyLabels(
      scene.mesh.geometry,
      preview.indices,
      preview.labels,
      records.length, // the pair the next commit would get at a new spot
    );
  }
  setStatus("");
}

function repaintRecords(): void {
  if (!scene.mesh) return;
  for (const rec of records) {
    applyLabels(scene.mesh.geometry, rec.indices, rec.labels, rec.palette);
  }
}

function appendRow(rec: MeasurementRecord): void {
  const tbody = $("rows");
  const tr = document.createElement("tr");
  for (const cell of [
    String(rec.id),
    formatTheta(rec.theta_deg),
    rec.radius.toPrecision(4),
    String(rec.lambda),
    `${rec.n_plus} / ${rec.n_minus}`,
  ]) {
    const td = document.createElement("td");
    td.textContent = cell;
    tr.appendChild(td);
  }
  tbody.appendChild(tr);
}

function newDraft(id: string): void {
  draft?.dispose();
  draft = new DraftController(api, id, {
    onPreview: showPreview,
    onError: (reason) => setStatus(errorHint(reason), true),
  });
  draft.setLambda(parseFloat($<HTMLInputElement>("lambda").value));
  draft.setMetric(
    $<HTMLInputElement>("geodesic").checked ? "geodesic" : "euclidean",
  );
}

$<HTMLInputElement>("file").addEventListener("change", async (ev) => {
  const input = ev.target as HTMLInputElement;
  const file = input.files?.[0];
  if (!file) return;
  try {
    setStatus(`uploading ${file.name}…`);
    const info = await api.uploadMesh(await file.arrayBuffer(), file.name);
    meshId = info.id;
    scene.setMesh(await api.getGeometry(info.id));
    newDraft(info.id);
    records = [];
    $("rows").innerHTML = "";
    $<HTMLAnchorElement>("csv").href = api.csvUrl(info.id);
    setStatus(
      `${info.name}: ${info.vertex_count} vertices, ${info.face_count} faces`,
    );
  } catch (err) {
    setStatus(err instanceof Error ? err.message : String(err), true);
  }
});

$<HTMLInputElement>("pickmode").addEventListener("change", (ev) => {
  pickMode = (ev.target as HTMLInputElement).checked;
});

$<HTMLInputElement>("lambda").addEventListener("input", (ev) => {
  const value = parseFloat((ev.target as HTMLInputElement).value);
  $("lambdaval").textContent = value.toFixed(1);
  draft?.setLambda(value);
});

$<HTMLInputElement>("geodesic").addEventListener("change", (ev) => {
  draft?.setMetric(
    (ev.target as HTMLInputElement).checked ? "geodesic" : "euclidean",
  );
});

canvas.addEventListener("pointerdown", (ev) => {
  if (!scene.mesh) return;
  if (!pickMode) {
    orbiting = true;
    lastPointer = { x: ev.clientX, y: ev.clientY };
    return;
  }
  const hit = scene.pickAtPointer(ev);
  if (!hit) return; // background click: draft unchanged
  scene.showMarker(hit.point);
  draft?.setPoint({ x: hit.point.x, y: hit.point.y, z: hit.point.z });
  dragging = true;
});

canvas.addEventListener("pointermove", (ev) => {
  if (orbiting && scene.mesh) {
    const dx = (ev.clientX - lastPointer.x) * 0.005;
    const dy = (ev.clientY - lastPointer.y) * 0.005;
    lastPointer = { x: ev.clientX, y: ev.clientY };
    const target = scene.mesh.geometry.boundingSphere!.center;
    const offset = scene.camera.position.clone().sub(target);
    const spherical = new THREE.Spherical().setFromVector3(offset);
    spherical.theta -= dx;
    spherical.phi = Math.min(
      Math.PI - 0.05,
      Math.max(0.05, spherical.phi - dy),
    );
    scene.camera.position
      .copy(target)
      .add(new THREE.Vector3().setFromSpherical(spherical));
    scene.camera.lookAt(target);
    return;
  }
  if (!dragging || !draft?.draft.point) return;
  const hit = scene.pickAtPointer(ev);
  if (!hit) return;
  const p = draft.draft.point;
  const radius = hit.point.distanceTo(new THREE.Vector3(p.x, p.y, p.z));
  if (radius > 0) {
    draft.setRadius(radius);
    $("radius").textContent = radius.toPrecision(4);
  }
});

window.addEventListener("pointerup", () => {
  dragging = false;
  orbiting = false;
});

canvas.addEventListener("wheel", (ev) => {
  if (!scene.mesh) return;
  ev.preventDefault();
  const target = scene.mesh.geometry.boundingSphere!.center;
  const offset = scene.camera.position.clone().sub(target);
  offset.multiplyScalar(ev.deltaY > 0 ? 1.1 : 1 / 1.1);
  scene.camera.position.copy(target).add(offset);
});

$("commit").addEventListener("click", async () => {
  if (!draft || !meshId) return;
  try {
    const rec = await draft.commit();
    records.push(rec);
    appendRow(rec);
    if (scene.mesh) {
      clearColors(scene.mesh.geometry);
      repaintRecords();
    }
    setStatus(`recorded #${rec.id}: θ = ${formatTheta(rec.theta_deg)}°`);
  } catch (err) {
    setStatus(err instanceof Error ? err.message : String(err), true);
  }
});

function animate(): void {
  scene.render();
  requestAnimationFrame(animate);
}
animate();

api
  .health()
  .then((h) => setStatus(`service ${h.version} ready — upload a mesh`))
  .catch(() => setStatus("service unreachable", true));
