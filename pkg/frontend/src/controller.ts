import { type SessionApi } from './api.js';
import type { AlphaSpec, CreateSessionRequest, SessionState } from './types.js';

export interface EnergyPoint {
  iter: number;
  alpha: number;
  total: number;
  edge: number;
  region: number;
}

/** Everything the canvas layer needs to draw one frame. */
export interface ViewState {
  state: SessionState | null;
  showBoundary: boolean;
  running: boolean;
  /** set when a command failed; the run loop is paused until retry() */
  error: string | null;
}

export type RenderFn = (view: ViewState) => void;

/**
 * Owns one server session and serializes every command against it: steps,
 * drags, and alpha changes are chained so no two requests overlap, matching
 * the service's one-mutation-at-a-time contract.  The curve it hands to the
 * renderer is always the server's latest sample, never client-side geometry.
 */
export class SessionController {
  private chain: Promise<unknown> = Promise.resolve();
  private pending = 0;
  private id: string | null = null;
  private state: SessionState | null = null;
  private lastRendered: ViewState | null = null;
  private timer: ReturnType<typeof setInterval> | null = null;
  private lastTraceLength = 0;

  showBoundary = false;
  running = false;
  error: string | null = null;
  readonly energySeries: EnergyPoint[] = [];

  constructor(
    private readonly api: SessionApi,
    private readonly render: RenderFn,
    private readonly cadenceMs = 150,
  ) {}

  get sessionId(): string | null {
    return this.id;
  }

  get current(): SessionState | null {
    return this.state;
  }

  /** The view most recently handed to the renderer. */
  get rendered(): ViewState | null {
    return this.lastRendered;
  }

  get busy(): boolean {
    return this.pending > 0;
  }

  /** Wait for every queued command to settle (for tests and shutdown). */
  idle(): Promise<void> {
    return this.chain.then(() => undefined);
  }

  open(req: CreateSessionRequest): Promise<SessionState | null> {
    return this.enqueue(async () => {
      const created = await this.api.createSession(req);
      this.id = created.id;
      this.energySeries.length = 0;
      this.lastTraceLength = 0;
      return this.api.getState(created.id);
    });
  }

  step(n = 1): Promise<SessionState | null> {
    return this.enqueue(() => this.api.step(this.requireId(), n));
  }

  drag(index: number, row: number, col: number): Promise<SessionState | null> {
    return this.enqueue(() => this.api.movePoint(this.requireId(), index, row, col));
  }

  setAlpha(alpha: AlphaSpec): Promise<SessionState | null> {
    return this.enqueue(() => this.api.setAlpha(this.requireId(), alpha));
  }

  refresh(): Promise<SessionState | null> {
    return this.enqueue(() => this.api.getState(this.requireId()));
  }

  /** Step repeatedly at the animation cadence until paused or terminal. */
  run(): void {
    if (this.timer !== null || this.id === null) return;
    if (this.state !== null && this.state.status !== 'running') return;
    this.running = true;
    this.error = null;
    this.timer = setInterval(() => this.tick(), this.cadenceMs);
    this.notify();
  }

  pause(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
    if (this.running) {
      this.running = false;
      this.notify();
    }
  }

  /** Clear the failure banner and re-sync with the server. */
  retry(): Promise<SessionState | null> {
    this.error = null;
    return this.refresh();
  }

  toggleBoundary(): void {
    this.showBoundary = !this.showBoundary;
    this.notify();
  }

  async close(): Promise<void> {
    this.pause();
    const id = this.id;
    if (id === null) return;
    await this.enqueue(async () => {
      await this.api.deleteSession(id);
      return null;
    });
    this.id = null;
    this.state = null;
    this.notify();
  }

  private requireId(): string {
    if (this.id === null) throw new Error('no open session');
    return this.id;
  }

  private tick(): void {
    if (this.pending > 0) return; // previous command still in flight
    void this.step(1);
  }

  private enqueue(fn: () => Promise<SessionState | null>): Promise<SessionState | null> {
    this.pending += 1;
    const next = this.chain.then(async () => {
      try {
        const state = await fn();
        if (state !== null) this.accept(state);
        return state;
      } catch (err) {
        this.fail(err);
        return null;
      } finally {
        this.pending -= 1;
      }
    });
    this.chain = next;
    return next;
  }

  private accept(state: SessionState): void {
    this.state = state;
    if (state.trace_length > this.lastTraceLength) {
      this.lastTraceLength = state.trace_length;
      this.energySeries.push({
        iter: state.iters,
        alpha: state.alpha,
        total: state.energies.total,
        edge: state.energies.edge,
        region: state.energies.region,
      });
    }
    if (this.running && state.status !== 'running') {
      this.pause(); // finished; pause() notifies
      return;
    }
    this.notify();
  }

  private fail(err: unknown): void {
    this.error = err instanceof Error ? err.message : String(err);
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
    this.running = false;
    this.notify();
  }

  private notify(): void {
    const view: ViewState = {
      state: this.state,
      showBoundary: this.showBoundary,
      running: this.running,
      error: this.error,
    };
    this.lastRendered = view;
    this.render(view);
  }
}
