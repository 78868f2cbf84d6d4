/** Review-flow state machine mirroring the service's blind-first protocol.
 *
 * The server is the source of truth: every transition round-trips through
 * it, and `refresh()` re-derives the phase from GET /next, so a mid-case
 * page reload resumes exactly where the protocol left off. The client only
 * mirrors the gating (which buttons are enabled); it never shortcuts it.
 * There is no back navigation.
 */

import { ApiClient } from './api.js';
import type { CaseView, GuidanceView, Prediction } from './types.js';

export type FlowPhase = 'Briefing' | 'AwaitInitial' | 'GuidanceRevealed' | 'Done';

export interface FlowState {
  phase: FlowPhase;
  case: CaseView | null;
  guidance: GuidanceView | null;
}

export class ProtocolError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'ProtocolError';
  }
}

export class ReviewFlow {
  private state: FlowState = { phase: 'Briefing', case: null, guidance: null };
  private sessionId: string | null = null;

  constructor(
    private readonly client: ApiClient,
    public readonly briefing: string = 'Answer each case before any guidance is shown.',
  ) {}

  get current(): FlowState {
    return this.state;
  }

  get canSubmitInitial(): boolean {
    return this.state.phase === 'AwaitInitial';
  }

  get canSubmitFinal(): boolean {
    return this.state.phase === 'GuidanceRevealed';
  }

  async start(participantId: string, seed = 0): Promise<void> {
    const info = await this.client.createSession(participantId, seed);
    this.sessionId = info.session_id;
    await this.refresh();
  }

  /** Attach to an existing session (page reload) and resume its phase. */
  async resume(sessionId: string): Promise<void> {
    this.sessionId = sessionId;
    await this.refresh();
  }

  /** Re-derive the phase from the server. */
  async refresh(): Promise<void> {
    if (this.sessionId === null) {
      throw new ProtocolError('no active session');
    }
    const next = await this.client.nextCase(this.sessionId);
    if (next.done) {
      this.state = { phase: 'Done', case: null, guidance: null };
      return;
    }
    this.state = {
      phase: next.phase,
      case: next.case,
      guidance: next.phase === 'GuidanceRevealed' ? (next.guidance ?? null) : null,
    };
  }

  async submitInitial(prediction: Prediction): Promise<void> {
    if (!this.canSubmitInitial || this.state.case === null || this.sessionId === null) {
      throw new ProtocolError('initial decision not accepted in this phase');
    }
    const res = await this.client.submitInitial(
      this.sessionId,
      this.state.case.id,
      prediction,
    );
    if (res.advance) {
      await this.refresh();
    } else {
      this.state = {
        phase: 'GuidanceRevealed',
        case: this.state.case,
        guidance: res.guidance,
      };
    }
  }

  async submitFinal(prediction: Prediction): Promise<void> {
    if (!this.canSubmitFinal || this.state.case === null || this.sessionId === null) {
      throw new ProtocolError('final decision requires revealed guidance');
    }
    await this.client.submitFinal(this.sessionId, this.state.case.id, prediction);
    await this.refresh();
  }
}
