/** Parameter controls: one bounded slider paired with a numeric field per
 * design parameter, labelled with the name and unit exactly as served.
 *
 * Both inputs stay in sync. Values typed into the numeric field that fall
 * outside the served bounds are clamped to the nearest bound with an inline
 * notice; non-numeric text reverts to the current value. Sliders cannot leave
 * the bounds by construction.
 */
import type { ParameterInfo } from "./types.js";

export type ControlChange = (name: string, value: number) => void;

const SLIDER_STEPS = 200;

function stepFor(p: ParameterInfo): number {
  return (p.upper - p.lower) / SLIDER_STEPS;
}

export class Controls {
  private readonly sliders = new Map<string, HTMLInputElement>();
  private readonly fields = new Map<string, HTMLInputElement>();
  private readonly notices = new Map<string, HTMLElement>();

  constructor(
    root: HTMLElement,
    private readonly params: ParameterInfo[],
    initial: Record<string, number>,
    private readonly onChange: ControlChange,
  ) {
    for (const p of params) {
      const row = document.createElement("div");
      row.className = "control";
      row.dataset.param = p.name;

      const label = document.createElement("label");
      label.className = "control-label";
      label.textContent = `${p.name} (${p.unit})`;
      label.htmlFor = `slider-${p.name}`;

      const slider = document.createElement("input");
      slider.type = "range";
      slider.id = `slider-${p.name}`;
      slider.min = String(p.lower);
      slider.max = String(p.upper);
      slider.step = String(stepFor(p));
      slider.value = String(initial[p.name]);
      slider.addEventListener("input", () => {
        this.apply(p, Number(slider.value));
      });

      const field = document.createElement("input");
      field.type = "number";
      field.className = "control-field";
      field.min = String(p.lower);
      field.max = String(p.upper);
      field.step = String(stepFor(p));
      field.value = String(initial[p.name]);
      field.addEventListener("change", () => {
        const typed = Number(field.value);
        if (field.value.trim() === "" || Number.isNaN(typed)) {
          field.value = slider.value; // revert: nothing usable was typed
          return;
        }
        this.apply(p, typed);
      });

      const notice = document.createElement("span");
      notice.className = "control-notice";
      notice.hidden = true;

      row.append(label, slider, field, notice);
      root.appendChild(row);
      this.sliders.set(p.name, slider);
      this.fields.set(p.name, field);
      this.notices.set(p.name, notice);
    }
  }

  /** Clamp into bounds, sync both widgets, notify. */
  private apply(p: ParameterInfo, raw: number): void {
    const clamped = Math.min(p.upper, Math.max(p.lower, raw));
    const slider = this.sliders.get(p.name)!;
    const field = this.fields.get(p.name)!;
    const notice = this.notices.get(p.name)!;
    if (clamped !== raw) {
      notice.textContent = `clamped to [${p.lower}, ${p.upper}]`;
      notice.hidden = false;
    } else {
      notice.hidden = true;
      notice.textContent = "";
    }
    slider.value = String(clamped);
    field.value = String(clamped);
    this.onChange(p.name, clamped);
  }

  /** Programmatic set (e.g. restoring a design from history). */
  set(name: string, value: number): void {
    const p = this.params.find((q) => q.name === name);
    if (!p) throw new RangeError(`unknown parameter: ${name}`);
    this.apply(p, value);
  }
}
