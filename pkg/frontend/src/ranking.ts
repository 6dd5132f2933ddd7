// The officer's working order of the current menu.  The draft starts as
// the menu in service order and is rearranged by click-or-drag moves; it
// never adds or removes states, so the only way it stops being a
// permutation of the menu is the menu itself changing under it.

export class RankingDraft {
  private order: string[];

  constructor(menu: readonly string[]) {
    this.order = [...menu];
  }

  get items(): string[] {
    return [...this.order];
  }

  /** Move the item at `from` so it sits at `to`, shifting the rest. */
  moveTo(from: number, to: number): boolean {
    if (
      from < 0 ||
      from >= this.order.length ||
      to < 0 ||
      to >= this.order.length ||
      from === to
    ) {
      return false;
    }
    const [item] = this.order.splice(from, 1);
    this.order.splice(to, 0, item);
    return true;
  }

  moveUp(index: number): boolean {
    return this.moveTo(index, index - 1);
  }

  moveDown(index: number): boolean {
    return this.moveTo(index, index + 1);
  }

  /** Submit gate: the draft must order exactly the presented menu. */
  isPermutationOf(menu: readonly string[]): boolean {
    if (menu.length !== this.order.length) {
      return false;
    }
    const want = [...menu].sort();
    const got = [...this.order].sort();
    return want.every((state, i) => state === got[i]);
  }

  toRanking(): string[] {
    return this.items;
  }
}
