/** Simulation history: immutable record of completed runs plus a side-by-side
 * comparison of up to four selected designs.
 *
 * Each completed simulation becomes one list entry. Selected entries appear
 * as columns of a per-output table whose best cell is highlighted per the
 * served direction map (lower is better for demand-like outputs, higher for
 * generation). With nothing selected the compare area shows an empty-state
 * hint instead of a bare table.
 */
import { fmt } from "./format.js";
import type { HistoryEntry } from "./state.js";
import type { OutputInfo } from "./types.js";

export const MAX_COMPARE = 4;

export class HistoryView {
  private readonly list: HTMLUListElement;
  private readonly compare: HTMLElement;
  private readonly checkboxes = new Map<number, HTMLInputElement>();
  private readonly entries: HistoryEntry[] = [];

  constructor(
    root: HTMLElement,
    private readonly outputs: OutputInfo[],
  ) {
    const section = document.createElement("section");
    section.className = "panel history-panel";
    const title = document.createElement("h2");
    title.textContent = "Simulation history";
    this.list = document.createElement("ul");
    this.list.className = "history-list";
    this.compare = document.createElement("div");
    this.compare.className = "compare";
    section.append(title, this.list, this.compare);
    root.appendChild(section);
    this.renderCompare();
  }

  addEntry(entry: HistoryEntry): void {
    this.entries.push(entry);
    const item = document.createElement("li");
    item.className = "history-entry";
    item.dataset.entry = String(entry.id);

    const checkbox = document.createElement("input");
    checkbox.type = "checkbox";
    checkbox.id = `compare-${entry.id}`;
    checkbox.addEventListener("change", () => this.onSelectionChange());
    this.checkboxes.set(entry.id, checkbox);

    const label = document.createElement("label");
    label.htmlFor = checkbox.id;
    const when = new Date(entry.completedAt).toLocaleTimeString();
    label.textContent = `design #${entry.id} · ${when}`;

    const detail = document.createElement("span");
    detail.className = "entry-detail";
    detail.textContent = this.outputs
      .map((o) => {
        const sim = entry.simulated[o.name];
        const diff = entry.diffs[o.name];
        if (sim === undefined) return "";
        const d = diff === undefined ? "" : ` (|Δ| ${fmt(diff)})`;
        return `${o.name}: ${fmt(sim)}${d}`;
      })
      .filter(Boolean)
      .join(" · ");

    item.append(checkbox, label, detail);
    this.list.appendChild(item);
    this.onSelectionChange();
  }

  private selected(): HistoryEntry[] {
    return this.entries.filter((e) => this.checkboxes.get(e.id)?.checked);
  }

  private onSelectionChange(): void {
    const picked = this.selected();
    const full = picked.length >= MAX_COMPARE;
    for (const [id, box] of this.checkboxes) {
      box.disabled = full && !box.checked && this.entries.some((e) => e.id === id);
    }
    this.renderCompare();
  }

  private renderCompare(): void {
    this.compare.textContent = "";
    const picked = this.selected();
    if (picked.length === 0) {
      const hint = document.createElement("p");
      hint.className = "compare-empty";
      hint.textContent =
        this.entries.length === 0
          ? "No simulations yet — run one to start a history."
          : `Select up to ${MAX_COMPARE} entries to compare them side by side.`;
      this.compare.appendChild(hint);
      return;
    }
    const table = document.createElement("table");
    table.className = "compare-table";
    const head = document.createElement("tr");
    const corner = document.createElement("th");
    corner.textContent = "output";
    head.appendChild(corner);
    for (const e of picked) {
      const th = document.createElement("th");
      th.textContent = `#${e.id}`;
      head.appendChild(th);
    }
    table.appendChild(head);

    for (const out of this.outputs) {
      const tr = document.createElement("tr");
      tr.dataset.output = out.name;
      const name = document.createElement("td");
      name.textContent = `${out.name} (${out.unit})`;
      tr.appendChild(name);
      const values = picked.map((e) => e.simulated[out.name]);
      const usable = values.filter((v): v is number => v !== undefined);
      const best =
        usable.length === 0
          ? undefined
          : out.direction === "max"
            ? Math.max(...usable)
            : Math.min(...usable);
      for (const v of values) {
        const td = document.createElement("td");
        td.textContent = v === undefined ? "—" : fmt(v);
        if (v !== undefined && v === best) td.classList.add("best");
        tr.appendChild(td);
      }
      table.appendChild(tr);
    }
    this.compare.appendChild(table);
  }
}
