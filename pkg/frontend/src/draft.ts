import type { AlphaSpec, CreateSessionRequest, SchemeName } from './types.js';

/** Fewest control points each refinement rule can run on. */
export const MIN_POINTS: Record<SchemeName, number> = {
  'four-point': 4,
  'cubic-bspline': 3,
};

export interface DraftOptions {
  alpha?: AlphaSpec;
  depth?: number;
  polarity?: 'dark' | 'bright';
  omega?: number;
  q?: number;
}

/**
 * Click-to-place state for a new session: control points gathered one click at
 * a time plus an optional region box dragged over the image.  Everything is in
 * image coordinates; the canvas layer converts from screen pixels.
 */
export class PointDraft {
  private pts: [number, number][] = [];
  private box_: [number, number, number, number] | null = null;

  constructor(public scheme: SchemeName = 'four-point') {}

  get points(): readonly [number, number][] {
    return this.pts;
  }

  get box(): [number, number, number, number] | null {
    return this.box_;
  }

  get minPoints(): number {
    return MIN_POINTS[this.scheme];
  }

  get canConfirm(): boolean {
    return this.pts.length >= this.minPoints;
  }

  /** Inline message shown while the draft is not confirmable, else null. */
  get validationMessage(): string | null {
    if (this.canConfirm) return null;
    return `place at least ${this.minPoints} points for ${this.scheme} (${this.pts.length} so far)`;
  }

  add(row: number, col: number): void {
    this.pts.push([row, col]);
  }

  undo(): void {
    this.pts.pop();
  }

  clear(): void {
    this.pts = [];
    this.box_ = null;
  }

  /** Region box from two drag corners, any order; snapped to whole pixels. */
  setBox(rowA: number, colA: number, rowB: number, colB: number): void {
    this.box_ = [
      Math.round(Math.min(rowA, rowB)),
      Math.round(Math.max(rowA, rowB)),
      Math.round(Math.min(colA, colB)),
      Math.round(Math.max(colA, colB)),
    ];
  }

  clearBox(): void {
    this.box_ = null;
  }

  /** Session-creation payload; the placed points are interpolation targets. */
  toRequest(imageBase64: string, options: DraftOptions = {}): CreateSessionRequest {
    if (!this.canConfirm) {
      throw new Error(this.validationMessage ?? 'draft not confirmable');
    }
    const req: CreateSessionRequest = {
      image_base64: imageBase64,
      scheme: this.scheme,
      points: this.pts.map((p) => [p[0], p[1]]),
    };
    if (this.box_) req.box = this.box_;
    if (options.alpha) req.alpha = options.alpha;
    if (options.depth !== undefined) req.depth = options.depth;
    if (options.polarity) req.polarity = options.polarity;
    if (options.omega !== undefined) req.omega = options.omega;
    if (options.q !== undefined) req.q = options.q;
    return req;
  }
}
