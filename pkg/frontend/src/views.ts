// DOM for the two screens.  Everything rendered here is lifted straight
// from service payloads: the console never reorders menus, never
// recomputes capacities, and never judges verdicts on its own.

import { AuditVerdict, RoundView, SessionReport, SessionState } from "./api.js";
import { RankingDraft } from "./ranking.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export interface RoundHandlers {
  onMoveUp(index: number): void;
  onMoveDown(index: number): void;
  onSubmit(): void;
}

function menuLabel(state: string, remaining: number | null): string {
  return remaining === null ? state : `${state} (${remaining} left)`;
}

export function officerRoundView(
  view: RoundView,
  draft: RankingDraft,
  handlers: RoundHandlers,
  busy: boolean,
): HTMLElement {
  const root = el("section", "round-view");
  root.appendChild(
    el(
      "h2",
      "round-heading",
      `Round ${view.round + 1}: officer ${view.officer.id} (type ${view.officer.type})`,
    ),
  );

  const menu = el("ul", "menu");
  const remainingByState = new Map(
    view.menu.map((entry) => [entry.state, entry.remaining]),
  );
  const items = draft.items;
  items.forEach((state, index) => {
    const row = el("li", "menu-row");
    row.dataset.state = state;
    row.appendChild(
      el("span", "menu-state", menuLabel(state, remainingByState.get(state) ?? null)),
    );
    const up = el("button", "move-up", "↑");
    up.type = "button";
    up.disabled = busy || index === 0;
    up.addEventListener("click", () => handlers.onMoveUp(index));
    const down = el("button", "move-down", "↓");
    down.type = "button";
    down.disabled = busy || index === items.length - 1;
    down.addEventListener("click", () => handlers.onMoveDown(index));
    row.appendChild(up);
    row.appendChild(down);
    menu.appendChild(row);
  });
  root.appendChild(menu);

  if (view.binding.length > 0) {
    const binding = el("p", "binding", `Binding bounds: ${view.binding.join(", ")}`);
    root.appendChild(binding);
  }

  const submit = el("button", "submit", "Submit ranking");
  submit.type = "button";
  submit.disabled =
    busy || !draft.isPermutationOf(view.menu.map((entry) => entry.state));
  submit.addEventListener("click", () => handlers.onSubmit());
  root.appendChild(submit);
  return root;
}

export function adminProgressView(state: SessionState): HTMLElement {
  const root = el("aside", "admin-view");
  root.appendChild(el("h2", undefined, "Progress"));
  root.appendChild(el("p", "admin-status", `Status: ${state.status}`));

  const committed = el("ol", "committed");
  for (const step of state.committed) {
    committed.appendChild(
      el("li", "committed-row", `${step.officer} → ${step.state}`),
    );
  }
  root.appendChild(committed);

  const remaining = state.view?.remaining;
  if (remaining) {
    const capacities = el("ul", "capacities");
    for (const [state_, left] of Object.entries(remaining)) {
      capacities.appendChild(
        el("li", "capacity-row", `${state_}: ${left} seat(s) left`),
      );
    }
    root.appendChild(capacities);
  }
  if (state.view && state.view.binding.length > 0) {
    root.appendChild(
      el("p", "admin-binding", `Binding: ${state.view.binding.join(", ")}`),
    );
  }
  return root;
}

function verdictRow(verdict: AuditVerdict): HTMLElement {
  const text = verdict.detail
    ? `${verdict.audit}: ${verdict.status} (${verdict.detail})`
    : `${verdict.audit}: ${verdict.status}`;
  const row = el("li", `verdict-row verdict-${verdict.status}`, text);
  row.dataset.audit = verdict.audit;
  row.dataset.status = verdict.status;
  return row;
}

export function finalView(
  allocation: Record<string, string>,
  report: SessionReport | null,
): HTMLElement {
  const root = el("section", "final-view");
  root.appendChild(el("h2", undefined, "Final allocation"));
  const list = el("ul", "allocation");
  for (const [officer, state] of Object.entries(allocation)) {
    const row = el("li", "allocation-row", `${officer} → ${state}`);
    row.dataset.officer = officer;
    row.dataset.state = state;
    list.appendChild(row);
  }
  root.appendChild(list);

  if (report) {
    root.appendChild(el("h3", undefined, "Audit"));
    const verdicts = el("ul", "verdicts");
    for (const verdict of report.verdicts) {
      verdicts.appendChild(verdictRow(verdict));
    }
    root.appendChild(verdicts);
  }
  return root;
}

export function noticeBar(message: string): HTMLElement {
  return el("p", "notice", message);
}

export function errorBanner(message: string, onRetry?: () => void): HTMLElement {
  const banner = el("div", "banner");
  banner.appendChild(el("span", "banner-message", message));
  if (onRetry) {
    const retry = el("button", "retry", "Retry");
    retry.type = "button";
    retry.addEventListener("click", onRetry);
    banner.appendChild(retry);
  }
  return banner;
}
