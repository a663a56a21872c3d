// Wire types for the segmentation session service.  All geometry is in image
// coordinates: [row, col] pairs, 1-based, row down, col right, JSON numbers.

export type SchemeName = 'four-point' | 'cubic-bspline';

export type SessionStatus = 'running' | 'converged' | 'max-iters' | 'degenerate';

export interface PolygonWire {
  scheme: SchemeName;
  omega?: number;
  points: [number, number][];
}

export interface SessionEnergies {
  total: number;
  edge: number;
  region: number;
}

export interface SessionState {
  status: SessionStatus;
  iters: number;
  alpha: number;
  polygon: PolygonWire;
  curve: [number, number][];
  energies: SessionEnergies;
  area: number;
  means: { inside: number; outside: number };
  /** one [row, col, sign] triple per rasterized boundary pixel */
  boundary: [number, number, number][];
  trace_length: number;
}

export interface AlphaSpec {
  mode: 'two-phase' | 'fixed';
  value?: number;
}

export interface CircleSpec {
  center_row: number;
  center_col: number;
  radius: number;
  n_points?: number;
}

export interface CreateSessionRequest {
  image_path?: string;
  image_base64?: string;
  scheme?: SchemeName;
  omega?: number;
  points?: [number, number][];
  circle?: CircleSpec;
  alpha?: AlphaSpec;
  depth?: number;
  box?: [number, number, number, number];
  polarity?: 'dark' | 'bright';
  q?: number;
}

export interface CreateSessionResponse {
  id: string;
  rows: number;
  cols: number;
}

export interface TraceRecord {
  iter: number;
  event: string;
  alpha: number;
  e_total: number;
  e_grad: number;
  e_reg: number;
  grad_norm: number;
  max_disp: number;
  status: SessionStatus;
  [extra: string]: unknown;
}
