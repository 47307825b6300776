/** Draft measurement state and the preview request pipeline.
 *
 * Invariants: radius > 0, lambda >= 0.  Preview requests are throttled to
 * at most 10 per second and at most one is in flight; a newer draft
 * aborts the superseded request.
 */

import {
  GoniometerApi,
  MeasurementRequest,
  PreviewResponse,
} from "./api.js";

export interface PickedPoint {
  x: number;
  y: number;
  z: number;
}

export interface MeasurementDraft {
  point: PickedPoint | null;
  radius: number;
  lambda: number;
  metric: "geodesic" | "euclidean";
  preview: PreviewResponse | null;
}

export const MIN_PREVIEW_INTERVAL_MS = 100; // <= 10 requests per second

export function formatTheta(thetaDeg: number): string {
  return thetaDeg.toFixed(2);
}

export function formatFit(fit: number): string {
  return fit.toExponential(3);
}

export interface PreviewEvents {
  onPreview: (preview: PreviewResponse) => void;
  onError: (reason: string, detail?: string) => void;
}

/** Human hint for a domain error from the service. */
export function errorHint(reason: string): string {
  switch (reason) {
    case "PatchTooSmall":
    case "SnapTooFar":
      return "patch too small — drag farther";
    case "DegenerateProjection":
    case "DegenerateFrame":
      return "degenerate selection — adjust λ or move the point";
    case "SideTooSmall":
      return "one side has too few vertices — enlarge the patch";
    default:
      return reason;
  }
}

export class DraftController {
  readonly draft: MeasurementDraft = {
    point: null,
    radius: 0,
    lambda: 2,
    metric: "geodesic",
    preview: null,
  };

  private inflight: AbortController | null = null;
  private lastRequestAt = -Infinity;
  private pendingTimer: ReturnType<typeof setTimeout> | null = null;
  requestCount = 0;

  constructor(
    private readonly api: GoniometerApi,
    private readonly meshId: string,
    private readonly events: PreviewEvents,
    private readonly now: () => number = () => Date.now(),
  ) {}

  setPoint(point: PickedPoint): void {
    this.draft.point = point;
    this.schedulePreview();
  }

  setRadius(radius: number): void {
    this.draft.radius = radius;
    this.schedulePreview();
  }

  setLambda(lambda: number): void {
    if (lambda < 0) throw new Error("lambda must be >= 0");
    this.draft.lambda = lambda;
    this.schedulePreview();
  }

  setMetric(metric: "geodesic" | "euclidean"): void {
    this.draft.metric = metric;
    this.schedulePreview();
  }

  buildRequest(method: "drag" | "xyz" = "drag"): MeasurementRequest {
    const { point, radius, lambda, metric } = this.draft;
    if (!point) throw new Error("no point picked");
    if (!(radius > 0)) throw new Error("radius must be > 0");
    return { ...point, radius, lambda, metric, method };
  }

  get ready(): boolean {
    return this.draft.point !== null && this.draft.radius > 0;
  }

  /** Throttle: fire immediately if the interval has elapsed, otherwise
   *  (re)arm a single trailing-edge timer. */
  private schedulePreview(): void {
    if (!this.ready) return;
    const wait = this.lastRequestAt + MIN_PREVIEW_INTERVAL_MS - this.now();
    if (wait <= 0) {
      void this.firePreview();
      return;
    }
    if (this.pendingTimer !== null) clearTimeout(this.pendingTimer);
    this.pendingTimer = setTimeout(() => {
      this.pendingTimer = null;
      void this.firePreview();
    }, wait);
  }

  private async firePreview(): Promise<void> {
    if (!this.ready) return;
    this.lastRequestAt = this.now();
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    this.requestCount += 1;
    try {
      const preview = await this.api.preview(
        this.meshId,
        this.buildRequest(),
        controller.signal,
      );
      if (controller.signal.aborted) return; // superseded
      this.draft.preview = preview;
      this.events.onPreview(preview);
    } catch (err) {
      if (controller.signal.aborted) return;
      const reason = err instanceof Error ? err.message : String(err);
      const code = (err as { reason?: string }).reason ?? reason;
      this.events.onError(code, reason);
    } finally {
      if (this.inflight === controller) this.inflight = null;
    }
  }

  async commit() {
    const record = await this.api.commit(this.meshId, this.buildRequest());
    return record;
  }

  dispose(): void {
    if (this.pendingTimer !== null) clearTimeout(this.pendingTimer);
    this.inflight?.abort();
  }
}
