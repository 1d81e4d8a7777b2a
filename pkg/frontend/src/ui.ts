/** DOM view: level picker, play board, end-of-session summary. */

import { ApiError } from "./api.js";
import type { GameApi, LevelDetail, SessionSummary } from "./api.js";
import { SessionController } from "./game.js";

export interface MountOptions {
  playerId?: string;
  now?: () => number;
  tickMs?: number;
}

export interface AppHandle {
  /** Resolves once the level picker has rendered. */
  ready: Promise<void>;
  readonly controller: SessionController | null;
  readonly lastUpload: SessionSummary | null;
  destroy(): void;
}

export function mountApp(
  root: HTMLElement,
  api: GameApi,
  options: MountOptions = {},
): AppHandle {
  const playerId = options.playerId ?? "web";
  const tickMs = options.tickMs ?? 100;

  let controller: SessionController | null = null;
  let lastUpload: SessionSummary | null = null;
  let timer: ReturnType<typeof setInterval> | null = null;
  let notice = "";
  let ended = false;

  function el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    attrs: Record<string, string> = {},
    text = "",
  ): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag);
    for (const [key, value] of Object.entries(attrs)) {
      node.setAttribute(key, value);
    }
    if (text) node.textContent = text;
    return node;
  }

  function clear(): void {
    root.textContent = "";
  }

  function stopTimer(): void {
    if (timer !== null) {
      clearInterval(timer);
      timer = null;
    }
  }

  async function renderPicker(): Promise<void> {
    stopTimer();
    controller = null;
    notice = "";
    clear();
    root.append(el("h1", {}, "Whittle"));
    root.append(
      el(
        "p",
        { class: "tagline" },
        "Remove letters one at a time; the moment a word remains, it scores.",
      ),
    );
    const list = el("div", { id: "levels", class: "levels" });
    root.append(list);
    try {
      const index = await api.levels();
      for (const entry of index.levels) {
        const button = el(
          "button",
          { class: "level-button", "data-level": String(entry.index) },
          `Level ${entry.index}`,
        );
        button.append(el("span", { class: "sub" }, `${entry.challenges} challenges`));
        button.addEventListener("click", () => {
          void startLevel(entry.index);
        });
        list.append(button);
      }
    } catch (error) {
      list.append(el("p", { class: "error" }, describe(error)));
    }
  }

  async function startLevel(index: number): Promise<void> {
    let level: LevelDetail;
    try {
      level = await api.level(index);
    } catch (error) {
      root.append(el("p", { class: "error" }, describe(error)));
      return;
    }
    const suffix = Math.random().toString(36).slice(2, 8);
    const sessionId = `${playerId}-${suffix}-L${String(index).padStart(2, "0")}`;
    controller = new SessionController({
      level,
      playerId,
      sessionId,
      check: (challengeIndex, remaining, eliminatedPositions) =>
        api.check(index, challengeIndex, remaining, eliminatedPositions),
      now: options.now,
    });
    lastUpload = null;
    notice = "";
    ended = false;
    controller.begin();
    renderPlay();
    timer = setInterval(onTick, tickMs);
  }

  function onTick(): void {
    if (!controller) return;
    if (!controller.finished && controller.timeLeftMs() === 0) {
      controller.expire();
    }
    if (controller.finished) {
      finishSession();
      return;
    }
    const left = root.querySelector("#timer");
    if (left) left.textContent = formatSeconds(controller.timeLeftMs());
  }

  function renderPlay(): void {
    if (!controller) return;
    const state = controller.snapshot();
    clear();
    const header = el("div", { class: "header" });
    header.append(
      el("span", { id: "level-label" }, `Level ${state.levelIndex}`),
      el(
        "span",
        { id: "challenge-label" },
        `Challenge ${state.challengeIndex}/${state.challengeCount}`,
      ),
      el("span", { id: "score" }, String(state.totalScore)),
      el("span", { id: "timer" }, formatSeconds(controller.timeLeftMs())),
    );
    root.append(header);

    const board = el("div", { id: "board", class: "board" });
    for (const entry of controller.board()) {
      if (entry.eliminated) continue;
      const tile = el(
        "button",
        {
          class: entry.bonus ? "tile bonus" : "tile",
          "data-position": String(entry.position),
        },
        entry.letter,
      );
      tile.addEventListener("click", () => {
        void onLetter(entry.position);
      });
      board.append(tile);
    }
    root.append(board);
    root.append(el("div", { id: "status", class: "status" }, notice));

    const quit = el("button", { id: "quit", class: "quit" }, "Quit level");
    quit.addEventListener("click", () => {
      controller?.quit();
      finishSession();
    });
    root.append(quit);
  }

  async function onLetter(position: number): Promise<void> {
    if (!controller) return;
    try {
      const solved = await controller.eliminate(position);
      if (solved) {
        notice = `${solved.word} +${solved.score}`;
      }
    } catch (error) {
      notice = describe(error);
    }
    if (controller.finished) {
      finishSession();
    } else {
      renderPlay();
    }
  }

  // a late check response and the countdown can both land here; only the
  // first call may upload
  function finishSession(): void {
    if (!controller || ended) return;
    ended = true;
    stopTimer();
    const state = controller.snapshot();
    clear();
    root.append(el("h1", {}, "Level over"));
    root.append(el("p", { id: "end-reason" }, reasonText(state.endReason)));
    const scoreLine = el("p", {}, "Your score: ");
    scoreLine.append(el("strong", { id: "client-score" }, String(state.totalScore)));
    root.append(scoreLine);
    const summary = el("div", { id: "summary", "data-upload-state": "pending" });
    summary.append(el("p", {}, "Checking with the server..."));
    root.append(summary);
    const back = el("button", { id: "back" }, "Back to levels");
    back.addEventListener("click", () => {
      void renderPicker();
    });
    root.append(back);
    void uploadTrace(summary, state.totalScore);
  }

  async function uploadTrace(summary: HTMLElement, clientScore: number): Promise<void> {
    if (!controller) return;
    try {
      const response = await api.uploadTrace(controller.events);
      const session = response.sessions[0] ?? null;
      lastUpload = session;
      summary.textContent = "";
      if (session) {
        const line = el("p", {}, "Server replay: ");
        line.append(el("strong", { id: "server-score" }, String(session.totalScore)));
        line.append(
          el(
            "span",
            { id: "server-detail" },
            ` points, ${session.endReason}, ${session.challengesSolved} solved`,
          ),
        );
        summary.append(line);
        if (session.totalScore !== clientScore) {
          summary.append(
            el("p", { class: "error" }, "Server total differs from this client."),
          );
        }
      }
      summary.setAttribute("data-upload-state", "done");
    } catch (error) {
      summary.textContent = "";
      summary.append(el("p", { class: "error" }, describe(error)));
      summary.setAttribute("data-upload-state", "failed");
    }
  }

  function describe(error: unknown): string {
    if (error instanceof ApiError) return `Server said: ${error.message}`;
    if (error instanceof Error) return error.message;
    return String(error);
  }

  function reasonText(reason: string | null): string {
    if (reason === "completed") return "Level completed.";
    if (reason === "timed_out") return "Out of time.";
    return "Level abandoned.";
  }

  function formatSeconds(ms: number): string {
    return `${(ms / 1000).toFixed(1)}s`;
  }

  const ready = renderPicker();

  return {
    ready,
    get controller() {
      return controller;
    },
    get lastUpload() {
      return lastUpload;
    },
    destroy() {
      stopTimer();
    },
  };
}
