/** Client-side session state and trace recording.
 *
 * The server is the only judge of words and scores: every elimination is
 * confirmed over the wire before anything lands in the trace. Events are
 * only recorded in shapes the replay validator accepts, so an upload of
 * whatever this controller produced always verifies:
 *
 * - timestamps are non-decreasing integers relative to session start,
 * - eliminations are stamped strictly inside the challenge budget,
 * - a solve shares its elimination's timestamp,
 * - a timeout lands at or past the budget boundary,
 * - nothing is recorded for a click the server never confirmed.
 */

import type { CheckResult, EventKind, LevelDetail, TraceEvent } from "./api.js";

export type CheckFn = (
  challengeIndex: number,
  remaining: string,
  eliminatedPositions: number[],
) => Promise<CheckResult>;

export type EndReason = "completed" | "timed_out" | "abandoned";

export interface BoardLetter {
  position: number;
  letter: string;
  eliminated: boolean;
  bonus: boolean;
}

export interface SolveNotice {
  challengeIndex: number;
  word: string;
  score: number;
}

export interface SessionSnapshot {
  levelIndex: number;
  challengeIndex: number;
  challengeCount: number;
  totalScore: number;
  solvedCount: number;
  finished: boolean;
  endReason: EndReason | null;
}

export interface SessionOptions {
  level: LevelDetail;
  playerId: string;
  sessionId: string;
  check: CheckFn;
  now?: () => number;
}

export class SessionController {
  private readonly level: LevelDetail;
  private readonly playerId: string;
  private readonly sessionId: string;
  private readonly checkFn: CheckFn;
  private readonly now: () => number;

  private readonly recorded: TraceEvent[] = [];
  private readonly eliminated = new Set<number>();
  private challengePos = 0;
  private origin = 0;
  private lastTs = 0;
  private anchorTs: number | null = null;
  private started = false;
  private busy = false;
  private expiryPending = false;
  private reason: EndReason | null = null;
  private score = 0;
  private solved = 0;

  constructor(options: SessionOptions) {
    if (options.level.challenges.length === 0) {
      throw new Error("level has no challenges");
    }
    this.level = options.level;
    this.playerId = options.playerId;
    this.sessionId = options.sessionId;
    this.checkFn = options.check;
    this.now = options.now ?? (() => Date.now());
  }

  /** Start the clock and record the first challenge's start. */
  begin(): void {
    if (this.started) return;
    this.started = true;
    this.origin = this.now();
    this.anchorTs = this.emit("start", this.rel());
  }

  get events(): TraceEvent[] {
    return this.recorded.slice();
  }

  get finished(): boolean {
    return this.reason !== null;
  }

  snapshot(): SessionSnapshot {
    return {
      levelIndex: this.level.index,
      challengeIndex: this.current.challengeIndex,
      challengeCount: this.level.challenges.length,
      totalScore: this.score,
      solvedCount: this.solved,
      finished: this.finished,
      endReason: this.reason,
    };
  }

  board(): BoardLetter[] {
    const challenge = this.current;
    return Array.from(challenge.challengeWord, (letter, position) => ({
      position,
      letter,
      eliminated: this.eliminated.has(position),
      bonus: challenge.bonusPosition === position,
    }));
  }

  budgetMs(): number {
    return this.current.timeBudgetSeconds * 1000;
  }

  timeLeftMs(): number {
    if (!this.started || this.finished || this.anchorTs === null) return 0;
    return Math.max(0, this.anchorTs + this.budgetMs() - this.rel());
  }

  /** Remove one letter; resolves to a notice when the server confirms a word. */
  async eliminate(position: number): Promise<SolveNotice | null> {
    if (!this.started || this.finished || this.busy) return null;
    const challenge = this.current;
    const word = challenge.challengeWord;
    if (
      !Number.isInteger(position) ||
      position < 0 ||
      position >= word.length ||
      this.eliminated.has(position)
    ) {
      return null;
    }
    const ts = this.rel();
    if (ts - this.anchorTs! >= this.budgetMs()) {
      this.performExpire();
      return null;
    }
    this.eliminated.add(position);
    const remaining = this.remaining();
    const positions = [...this.eliminated].sort((a, b) => a - b);
    this.busy = true;
    let result: CheckResult;
    try {
      result = await this.checkFn(challenge.challengeIndex, remaining, positions);
    } catch (error) {
      // unconfirmed click: leave the board and the trace untouched
      this.eliminated.delete(position);
      this.busy = false;
      this.expiryPending = false;
      throw error;
    }
    this.busy = false;
    if (this.reason === "abandoned") return null;
    this.emit("eliminate", ts, { originalIndex: position });
    if (!result.isWord) {
      if (this.expiryPending) {
        this.expiryPending = false;
        this.performExpire();
      }
      return null;
    }
    // the solving elimination already beat the clock, so a deferred expiry
    // no longer applies
    this.expiryPending = false;
    this.emit("solve", ts, { word: remaining, score: result.wouldScore });
    this.score += result.wouldScore;
    this.solved += 1;
    const notice = {
      challengeIndex: challenge.challengeIndex,
      word: remaining,
      score: result.wouldScore,
    };
    this.advance();
    return notice;
  }

  /** Called by the countdown when it hits zero; ignored while time remains. */
  expire(): void {
    if (!this.started || this.finished) return;
    if (this.busy) {
      this.expiryPending = true;
      return;
    }
    if (this.rel() - this.anchorTs! >= this.budgetMs()) {
      this.performExpire();
    }
  }

  /** Stop playing; the partial trace still uploads as an abandoned session. */
  quit(): void {
    if (!this.started || this.finished) return;
    this.reason = "abandoned";
  }

  private get current() {
    const pos = Math.min(this.challengePos, this.level.challenges.length - 1);
    return this.level.challenges[pos];
  }

  private remaining(): string {
    return this.board()
      .filter((entry) => !entry.eliminated)
      .map((entry) => entry.letter)
      .join("");
  }

  private advance(): void {
    this.challengePos += 1;
    this.eliminated.clear();
    if (this.challengePos >= this.level.challenges.length) {
      this.reason = "completed";
      this.anchorTs = null;
      return;
    }
    this.anchorTs = this.emit("start", this.rel());
  }

  private performExpire(): void {
    const boundary = Math.ceil(this.anchorTs! + this.budgetMs());
    this.emit("timeout", Math.max(this.rel(), boundary));
    this.reason = "timed_out";
    this.anchorTs = null;
  }

  private rel(): number {
    return Math.max(0, Math.floor(this.now() - this.origin));
  }

  private emit(
    kind: EventKind,
    ts: number,
    extra: { originalIndex?: number; word?: string; score?: number } = {},
  ): number {
    const stamped = Math.max(ts, this.lastTs);
    this.lastTs = stamped;
    this.recorded.push({
      sessionId: this.sessionId,
      playerId: this.playerId,
      levelIndex: this.level.index,
      challengeIndex: this.current.challengeIndex,
      kind,
      timestampMs: stamped,
      ...extra,
    });
    return stamped;
  }
}
