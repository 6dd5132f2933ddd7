import { describe, expect, it, vi } from "vitest";

import { RoundView, SessionReport, SessionState } from "../src/api.js";
import { RankingDraft } from "../src/ranking.js";
import {
  adminProgressView,
  errorBanner,
  finalView,
  officerRoundView,
} from "../src/views.js";

const view: RoundView = {
  round: 0,
  officer: { id: "i1", type: "t" },
  menu: [
    { state: "s1", remaining: 2 },
    { state: "s2", remaining: 1 },
  ],
  binding: ["at most 1 of types {t} in {s1}"],
  remaining: { s1: 2, s2: 1 },
};

function texts(root: HTMLElement, selector: string): string[] {
  return Array.from(root.querySelectorAll(selector)).map(
    (node) => node.textContent ?? "",
  );
}

describe("officerRoundView", () => {
  it("shows the menu with remaining seats, straight from the payload", () => {
    const node = officerRoundView(
      view,
      new RankingDraft(["s1", "s2"]),
      { onMoveUp: () => {}, onMoveDown: () => {}, onSubmit: () => {} },
      false,
    );
    expect(node.querySelector(".round-heading")?.textContent).toBe(
      "Round 1: officer i1 (type t)",
    );
    expect(texts(node, ".menu-state")).toEqual(["s1 (2 left)", "s2 (1 left)"]);
    expect(node.querySelector(".binding")?.textContent).toContain(
      "at most 1 of types {t} in {s1}",
    );
  });

  it("renders rows in draft order, not menu order", () => {
    const draft = new RankingDraft(["s1", "s2"]);
    draft.moveDown(0);
    const node = officerRoundView(
      view,
      draft,
      { onMoveUp: () => {}, onMoveDown: () => {}, onSubmit: () => {} },
      false,
    );
    expect(texts(node, ".menu-state")).toEqual(["s2 (1 left)", "s1 (2 left)"]);
  });

  it("hides remaining counts the service did not disclose", () => {
    const bare: RoundView = {
      ...view,
      menu: [
        { state: "s1", remaining: null },
        { state: "s2", remaining: null },
      ],
      binding: [],
      remaining: null,
    };
    const node = officerRoundView(
      bare,
      new RankingDraft(["s1", "s2"]),
      { onMoveUp: () => {}, onMoveDown: () => {}, onSubmit: () => {} },
      false,
    );
    expect(texts(node, ".menu-state")).toEqual(["s1", "s2"]);
    expect(node.querySelector(".binding")).toBeNull();
  });

  it("wires the move buttons to the row index", () => {
    const onMoveUp = vi.fn();
    const onMoveDown = vi.fn();
    const node = officerRoundView(
      view,
      new RankingDraft(["s1", "s2"]),
      { onMoveUp, onMoveDown, onSubmit: () => {} },
      false,
    );
    const rows = node.querySelectorAll(".menu-row");
    (rows[1].querySelector(".move-up") as HTMLButtonElement).click();
    expect(onMoveUp).toHaveBeenCalledWith(1);
    (rows[0].querySelector(".move-down") as HTMLButtonElement).click();
    expect(onMoveDown).toHaveBeenCalledWith(0);
    // the edges cannot move further
    expect((rows[0].querySelector(".move-up") as HTMLButtonElement).disabled).toBe(true);
    expect(
      (rows[1].querySelector(".move-down") as HTMLButtonElement).disabled,
    ).toBe(true);
  });

  it("disables submission while a request is in flight", () => {
    const onSubmit = vi.fn();
    const node = officerRoundView(
      view,
      new RankingDraft(["s1", "s2"]),
      { onMoveUp: () => {}, onMoveDown: () => {}, onSubmit },
      true,
    );
    const submit = node.querySelector(".submit") as HTMLButtonElement;
    expect(submit.disabled).toBe(true);
  });

  it("disables submission when the draft is not a permutation of the menu", () => {
    const node = officerRoundView(
      view,
      new RankingDraft(["s1"]),
      { onMoveUp: () => {}, onMoveDown: () => {}, onSubmit: () => {} },
      false,
    );
    expect((node.querySelector(".submit") as HTMLButtonElement).disabled).toBe(true);
  });
});

describe("adminProgressView", () => {
  const state: SessionState = {
    session_id: "abc",
    status: "awaiting-input",
    round: 1,
    committed: [{ officer: "i1", state: "s2" }],
    view: { ...view, round: 1, officer: { id: "i2", type: "t" }, remaining: { s1: 2, s2: 0 } },
    allocation: null,
  };

  it("lists commitments and remaining capacities", () => {
    const node = adminProgressView(state);
    expect(texts(node, ".committed-row")).toEqual(["i1 → s2"]);
    expect(texts(node, ".capacity-row")).toEqual([
      "s1: 2 seat(s) left",
      "s2: 0 seat(s) left",
    ]);
    expect(node.querySelector(".admin-status")?.textContent).toBe(
      "Status: awaiting-input",
    );
  });
});

describe("finalView", () => {
  it("shows the allocation and the audit verdicts", () => {
    const report: SessionReport = {
      instance: "example_6_1",
      mechanism: "dynamic-modular",
      allocation: { i1: "s2", i2: "s1" },
      messages: [],
      verdicts: [
        { audit: "fairness", status: "pass", witness: null, detail: "" },
        { audit: "bounds", status: "pass", witness: null, detail: "no bound binding" },
        { audit: "cpe", status: "pass", witness: null, detail: "" },
      ],
      steps: [],
    };
    const node = finalView({ i1: "s2", i2: "s1" }, report);
    expect(texts(node, ".allocation-row")).toEqual(["i1 → s2", "i2 → s1"]);
    expect(texts(node, ".verdict-row")).toEqual([
      "fairness: pass",
      "bounds: pass (no bound binding)",
      "cpe: pass",
    ]);
  });
});

describe("errorBanner", () => {
  it("offers a retry when given one", () => {
    const retry = vi.fn();
    const node = errorBanner("no such fixture", retry);
    expect(node.querySelector(".banner-message")?.textContent).toBe(
      "no such fixture",
    );
    (node.querySelector(".retry") as HTMLButtonElement).click();
    expect(retry).toHaveBeenCalledTimes(1);
  });

  it("omits the button without a handler", () => {
    expect(errorBanner("gone").querySelector(".retry")).toBeNull();
  });
});
