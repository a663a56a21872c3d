import { describe, expect, it } from 'vitest';

import { ApiError, type SessionApi } from '../src/api.js';
import { SessionController, type ViewState } from '../src/controller.js';
import type {
  AlphaSpec,
  CreateSessionRequest,
  SessionState,
  SessionStatus,
  TraceRecord,
} from '../src/types.js';

function makeState(partial: Partial<SessionState> = {}): SessionState {
  return {
    status: 'running',
    iters: 0,
    alpha: 0.1,
    polygon: {
      scheme: 'four-point',
      omega: 0.0625,
      points: [
        [10, 10],
        [10, 20],
        [20, 20],
        [20, 10],
      ],
    },
    curve: [
      [10, 10],
      [10, 20],
      [20, 20],
      [20, 10],
    ],
    energies: { total: -1, edge: -0.5, region: -0.5 },
    area: 100,
    means: { inside: 30, outside: 220 },
    boundary: [[10, 10, 1]],
    trace_length: 1,
    ...partial,
  };
}

/** In-memory stand-in for the service: ordered call log, optional latency,
 *  scripted statuses, and one-shot failures. */
class FakeApi implements SessionApi {
  calls: string[] = [];
  active = 0;
  maxActive = 0;
  delayMs = 0;
  failOn: string | null = null;
  statusScript: SessionStatus[] = [];
  lastState: SessionState | null = null;
  private steps = 0;

  private async exec<T>(name: string, result: () => T): Promise<T> {
    this.active += 1;
    this.maxActive = Math.max(this.maxActive, this.active);
    this.calls.push(name);
    if (this.delayMs > 0) {
      await new Promise((resolve) => setTimeout(resolve, this.delayMs));
    }
    this.active -= 1;
    if (this.failOn === name) {
      this.failOn = null;
      throw new ApiError(0, 'network failure: connection refused');
    }
    return result();
  }

  private nextState(extra: Partial<SessionState> = {}): SessionState {
    const scripted = this.statusScript.shift();
    const state = makeState({
      iters: this.steps,
      trace_length: this.steps + 1,
      energies: { total: -1 - this.steps, edge: -0.5, region: -0.5 },
      ...(scripted ? { status: scripted } : {}),
      ...extra,
    });
    this.lastState = state;
    return state;
  }

  createSession(_req: CreateSessionRequest) {
    return this.exec('create', () => ({ id: 'fake', rows: 64, cols: 64 }));
  }

  getState(_id: string) {
    return this.exec('get', () => this.nextState());
  }

  step(_id: string, n: number) {
    return this.exec('step', () => {
      this.steps += n;
      return this.nextState();
    });
  }

  movePoint(_id: string, _index: number, _row: number, _col: number) {
    return this.exec('move', () => this.nextState());
  }

  setAlpha(_id: string, _alpha: AlphaSpec) {
    return this.exec('alpha', () => this.nextState());
  }

  getTrace(_id: string) {
    return this.exec('trace', () => ({ trace: [] as TraceRecord[] }));
  }

  deleteSession(_id: string) {
    return this.exec('delete', () => undefined);
  }
}

function makeController(api: SessionApi, cadenceMs = 5) {
  const renders: ViewState[] = [];
  const controller = new SessionController(api, (view) => renders.push(view), cadenceMs);
  return { controller, renders };
}

const CREATE: CreateSessionRequest = { image_base64: 'aW1n', points: [[1, 1]] };

async function waitUntil(cond: () => boolean, timeoutMs = 2000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (!cond()) {
    if (Date.now() > deadline) throw new Error('condition not reached in time');
    await new Promise((resolve) => setTimeout(resolve, 2));
  }
}

describe('session controller', () => {
  it('serializes overlapping commands in issue order', async () => {
    const api = new FakeApi();
    api.delayMs = 5;
    const { controller } = makeController(api);

    void controller.open(CREATE);
    void controller.step(1);
    void controller.drag(2, 15, 15);
    void controller.setAlpha({ mode: 'fixed', value: 0.4 });
    await controller.idle();

    expect(api.calls).toEqual(['create', 'get', 'step', 'move', 'alpha']);
    expect(api.maxActive).toBe(1); // never two requests in flight
  });

  it('hands the renderer exactly the server state it received', async () => {
    const api = new FakeApi();
    const { controller, renders } = makeController(api);

    await controller.open(CREATE);
    await controller.step(1);
    await controller.step(1);

    const last = renders[renders.length - 1];
    expect(last.state).toBe(api.lastState); // same object, no reshaping
    expect(controller.rendered?.state?.curve).toBe(api.lastState?.curve);
  });

  it('appends one energy point per new trace record, none on plain reads', async () => {
    const api = new FakeApi();
    const { controller } = makeController(api);

    await controller.open(CREATE);
    await controller.step(1);
    await controller.step(1);
    expect(controller.energySeries.map((p) => p.iter)).toEqual([0, 1, 2]);

    await controller.refresh(); // same trace_length, no growth
    expect(controller.energySeries).toHaveLength(3);
    expect(controller.energySeries[2]).toEqual({
      iter: 2,
      alpha: 0.1,
      total: -3,
      edge: -0.5,
      region: -0.5,
    });
  });

  it('run loop steps at the cadence and pauses itself on a terminal status', async () => {
    const api = new FakeApi();
    api.statusScript = ['running', 'running', 'running', 'converged'];
    const { controller } = makeController(api, 5);

    await controller.open(CREATE);
    controller.run();
    expect(controller.running).toBe(true);

    await waitUntil(() => !controller.running);
    expect(controller.current?.status).toBe('converged');
    const stepsIssued = api.calls.filter((c) => c === 'step').length;
    expect(stepsIssued).toBe(3); // open consumed the first scripted state

    await new Promise((resolve) => setTimeout(resolve, 30));
    expect(api.calls.filter((c) => c === 'step').length).toBe(stepsIssued); // loop really stopped
  });

  it('a failed request pauses the loop and raises the retry banner', async () => {
    const api = new FakeApi();
    const { controller, renders } = makeController(api, 5);

    await controller.open(CREATE);
    controller.run();
    api.failOn = 'step';
    await waitUntil(() => controller.error !== null);

    expect(controller.running).toBe(false);
    expect(controller.error).toMatch(/network failure/);
    const failedView = renders[renders.length - 1];
    expect(failedView.error).toMatch(/network failure/);
    expect(failedView.running).toBe(false);

    const before = api.calls.length;
    await new Promise((resolve) => setTimeout(resolve, 30));
    expect(api.calls.length).toBe(before); // paused, not hammering the server

    await controller.retry();
    expect(controller.error).toBeNull();
    expect(controller.current).toBe(api.lastState);
  });

  it('boundary toggle rerenders without touching the server', async () => {
    const api = new FakeApi();
    const { controller, renders } = makeController(api);
    await controller.open(CREATE);

    const callsBefore = api.calls.length;
    controller.toggleBoundary();
    expect(api.calls.length).toBe(callsBefore);
    expect(renders[renders.length - 1].showBoundary).toBe(true);
    expect(renders[renders.length - 1].state).toBe(api.lastState);
  });

  it('surfaces a failed open and never reports a session', async () => {
    const api = new FakeApi();
    api.failOn = 'create';
    const { controller } = makeController(api);

    const state = await controller.open(CREATE);
    expect(state).toBeNull();
    expect(controller.sessionId).toBeNull();
    expect(controller.error).toMatch(/network failure/);
  });

  it('close deletes the session and blanks the view', async () => {
    const api = new FakeApi();
    const { controller, renders } = makeController(api);
    await controller.open(CREATE);
    await controller.close();

    expect(api.calls[api.calls.length - 1]).toBe('delete');
    expect(controller.sessionId).toBeNull();
    expect(renders[renders.length - 1].state).toBeNull();
  });
});
