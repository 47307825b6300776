/** three.js scene: render the mesh, pick points by raycast, paint the
 *  two-color segmentation returned by the service.
 *
 * Coloring is driven entirely by the label arrays in service responses;
 * the palette pairs mirror the server's CSV palette indices.
 */

import * as THREE from "three";

import { MeshGeometry } from "./api.js";

export type Rgb = [number, number, number];

/** Contrasting pairs, index-aligned with the server's palette column. */
export const PALETTE: Array<[Rgb, Rgb]> = [
  [[230, 25, 75], [60, 180, 240]], // red / sky blue
  [[255, 150, 20], [0, 90, 170]], // orange / navy
  [[255, 225, 25], [145, 30, 180]], // yellow / purple
  [[60, 180, 75], [240, 50, 230]], // green / magenta
  [[70, 240, 240], [128, 0, 0]], // cyan / maroon
  [[250, 190, 212], [0, 128, 128]], // pink / teal
  [[210, 245, 60], [0, 0, 128]], // lime / dark blue
  [[170, 110, 40], [220, 220, 255]], // brown / lavender
];

export const BASE_COLOR: Rgb = [200, 200, 200];

export function buildGeometry(geom: MeshGeometry): THREE.BufferGeometry {
  const g = new THREE.BufferGeometry();
  g.setAttribute("position", new THREE.BufferAttribute(geom.positions, 3));
  g.setAttribute("normal", new THREE.BufferAttribute(geom.normals, 3));
  const colors = new Float32Array(geom.positions.length);
  const [r, gg, b] = BASE_COLOR.map((c) => c / 255);
  for (let i = 0; i < colors.length; i += 3) {
    colors[i] = r;
    colors[i + 1] = gg;
    colors[i + 2] = b;
  }
  g.setAttribute("color", new THREE.BufferAttribute(colors, 3));
  g.setIndex(new THREE.BufferAttribute(geom.faces, 1));
  return g;
}

/** Reset every vertex to the base color. */
export function clearColors(geometry: THREE.BufferGeometry): void {
  const attr = geometry.getAttribute("color") as THREE.BufferAttribute;
  const [r, g, b] = BASE_COLOR.map((c) => c / 255);
  for (let i = 0; i < attr.count; i++) attr.setXYZ(i, r, g, b);
  attr.needsUpdate = true;
}

/** Paint the patch with the palette pair: negative labels get the first
 *  color of the pair, positive the second.  Vertices outside the patch
 *  keep whatever color they already have. */
export function applyLabels(
  geometry: THREE.BufferGeometry,
  indices: number[],
  labels: number[],
  paletteIndex: number,
): void {
  if (indices.length !== labels.length) {
    throw new Error("indices and labels length mismatch");
  }
  const attr = geometry.getAttribute("color") as THREE.BufferAttribute;
  const [lo, hi] = PALETTE[paletteIndex % PALETTE.length];
  for (let i = 0; i < indices.length; i++) {
    const [r, g, b] = labels[i] < 0 ? lo : hi;
    attr.setXYZ(indices[i], r / 255, g / 255, b / 255);
  }
  attr.needsUpdate = true;
}

export interface PickHit {
  point: THREE.Vector3;
  faceIndex: number;
}

/** Ray-cast normalized device coordinates against the mesh. */
export function pick(
  ndc: { x: number; y: number },
  camera: THREE.Camera,
  mesh: THREE.Mesh,
  raycaster = new THREE.Raycaster(),
): PickHit | null {
  raycaster.setFromCamera(new THREE.Vector2(ndc.x, ndc.y), camera);
  const hits = raycaster.intersectObject(mesh, false);
  if (hits.length === 0) return null;
  const hit = hits[0];
  return { point: hit.point.clone(), faceIndex: hit.faceIndex ?? -1 };
}

/** Full interactive scene; requires a browser with WebGL. */
export class ViewerScene {
  readonly scene = new THREE.Scene();
  readonly camera: THREE.PerspectiveCamera;
  readonly renderer: THREE.WebGLRenderer;
  mesh: THREE.Mesh | null = null;
  marker: THREE.Mesh;
  private raycaster = new THREE.Raycaster();

  constructor(private readonly canvas: HTMLCanvasElement) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.camera = new THREE.PerspectiveCamera(
      45,
      canvas.clientWidth / Math.max(1, canvas.clientHeight),
      0.001,
      1e6,
    );
    this.scene.background = new THREE.Color(0x18181c);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.45));
    const key = new THREE.DirectionalLight(0xffffff, 1.0);
    key.position.set(1, 2, 3);
    this.scene.add(key);

    const markerGeom = new THREE.SphereGeometry(1, 16, 12);
    this.marker = new THREE.Mesh(
      markerGeom,
      new THREE.MeshBasicMaterial({ color: 0xffffff }),
    );
    this.marker.visible = false;
    this.scene.add(this.marker);
  }

  setMesh(geom: MeshGeometry): THREE.Mesh {
    if (this.mesh) {
      this.scene.remove(this.mesh);
      this.mesh.geometry.dispose();
    }
    const geometry = buildGeometry(geom);
    const material = new THREE.MeshLambertMaterial({
      vertexColors: true,
      side: THREE.DoubleSide,
    });
    this.mesh = new THREE.Mesh(geometry, material);
    this.scene.add(this.mesh);

    geometry.computeBoundingSphere();
    const sphere = geometry.boundingSphere!;
    const dist = sphere.radius / Math.tan((this.camera.fov * Math.PI) / 360);
    this.camera.position
      .copy(sphere.center)
      .add(new THREE.Vector3(0, -0.4 * dist, 1.2 * dist));
    this.camera.lookAt(sphere.center);
    this.marker.scale.setScalar(sphere.radius * 0.015);
    return this.mesh;
  }

  pickAtPointer(event: PointerEvent): PickHit | null {
    if (!this.mesh) return null;
    const rect = this.canvas.getBoundingClientRect();
    const ndc = {
      x: ((event.clientX - rect.left) / rect.width) * 2 - 1,
      y: -(((event.clientY - rect.top) / rect.height) * 2 - 1),
    };
    return pick(ndc, this.camera, this.mesh, this.raycaster);
  }

  showMarker(point: THREE.Vector3): void {
    this.marker.position.copy(point);
    this.marker.visible = true;
  }

  render(): void {
    this.camera.aspect =
      this.canvas.clientWidth / Math.max(1, this.canvas.clientHeight);
    this.camera.updateProjectionMatrix();
    this.renderer.render(this.scene, this.camera);
  }
}
