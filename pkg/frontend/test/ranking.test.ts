import { describe, expect, it } from "vitest";

import { RankingDraft } from "../src/ranking.js";

describe("RankingDraft", () => {
  it("starts in menu order", () => {
    const draft = new RankingDraft(["s1", "s2", "s3"]);
    expect(draft.items).toEqual(["s1", "s2", "s3"]);
    expect(draft.isPermutationOf(["s1", "s2", "s3"])).toBe(true);
  });

  it("moves items up and down", () => {
    const draft = new RankingDraft(["s1", "s2", "s3"]);
    expect(draft.moveDown(0)).toBe(true);
    expect(draft.items).toEqual(["s2", "s1", "s3"]);
    expect(draft.moveUp(2)).toBe(true);
    expect(draft.items).toEqual(["s2", "s3", "s1"]);
  });

  it("rejects out-of-range moves without changing anything", () => {
    const draft = new RankingDraft(["s1", "s2"]);
    expect(draft.moveUp(0)).toBe(false);
    expect(draft.moveDown(1)).toBe(false);
    expect(draft.moveTo(0, 5)).toBe(false);
    expect(draft.moveTo(-1, 0)).toBe(false);
    expect(draft.items).toEqual(["s1", "s2"]);
  });

  it("moveTo shifts the in-between items", () => {
    const draft = new RankingDraft(["s1", "s2", "s3", "s4"]);
    draft.moveTo(3, 0);
    expect(draft.items).toEqual(["s4", "s1", "s2", "s3"]);
    draft.moveTo(0, 2);
    expect(draft.items).toEqual(["s1", "s2", "s4", "s3"]);
  });

  it("stays a permutation through any sequence of moves", () => {
    const menu = ["s1", "s2", "s3", "s4"];
    const draft = new RankingDraft(menu);
    for (let i = 0; i < 25; i++) {
      draft.moveTo(i % 4, (i * 3) % 4);
      expect(draft.isPermutationOf(menu)).toBe(true);
    }
  });

  it("gates against a different menu", () => {
    const draft = new RankingDraft(["s1", "s2"]);
    expect(draft.isPermutationOf(["s1"])).toBe(false);
    expect(draft.isPermutationOf(["s1", "s3"])).toBe(false);
    expect(draft.isPermutationOf(["s2", "s1"])).toBe(true);
    expect(draft.isPermutationOf(["s1", "s2", "s3"])).toBe(false);
  });

  it("does not leak its internal array", () => {
    const draft = new RankingDraft(["s1", "s2"]);
    draft.items.reverse();
    expect(draft.items).toEqual(["s1", "s2"]);
    const ranking = draft.toRanking();
    ranking.pop();
    expect(draft.items).toEqual(["s1", "s2"]);
  });
});
