/** PixCol: image-space coloring of a pixel classification.
 *
 * Left pane shows a reference image (the previous layer, an earlier
 * layer, or the observation); right pane paints every pixel with its
 * class color. Fresh classifications have every class black, so the
 * initial view is a black square. Hovering a pixel highlights its whole
 * class in white; clicking opens a color choice; typing while hovering
 * edits the label.
 */

import type { ClassificationDoc } from "./types.js";

export function parseHexColor(color: string): [number, number, number] {
	const m = /^#([0-9a-fA-F]{6})$/.exec(color);
	if (!m) throw new Error(`bad color ${color}`);
	const v = parseInt(m[1], 16);
	return [(v >> 16) & 0xff, (v >> 8) & 0xff, v & 0xff];
}

export function classAt(doc: ClassificationDoc, x: number, y: number): number {
	const [h, w] = doc.shape;
	if (x < 0 || y < 0 || x >= w || y >= h) return -1;
	return doc.assignment[y * w + x];
}

/** RGBA pixel buffer of the classification image. Pixels of
 * `highlightClass` render white; everything else renders its class
 * color (black until the user assigns one). */
export function buildClassImage(
	doc: ClassificationDoc,
	highlightClass: number | null = null,
): Uint8ClampedArray {
	const [h, w] = doc.shape;
	const out = new Uint8ClampedArray(h * w * 4);
	const colors = new Map<number, [number, number, number]>();
	for (const [id, entry] of Object.entries(doc.classes)) {
		colors.set(Number(id), parseHexColor(entry.color));
	}
	for (let k = 0; k < h * w; k++) {
		const cid = doc.assignment[k];
		let rgb = colors.get(cid) ?? [0, 0, 0];
		if (highlightClass !== null && cid === highlightClass) {
			rgb = [255, 255, 255];
		}
		out[k * 4] = rgb[0];
		out[k * 4 + 1] = rgb[1];
		out[k * 4 + 2] = rgb[2];
		out[k * 4 + 3] = 255;
	}
	return out;
}

/** Count of pixels per class id (small helper for the class list UI). */
export function classCounts(doc: ClassificationDoc): Map<number, number> {
	const counts = new Map<number, number>();
	for (const id of Object.keys(doc.classes)) counts.set(Number(id), 0);
	for (const cid of doc.assignment) {
		counts.set(cid, (counts.get(cid) ?? 0) + 1);
	}
	return counts;
}

export interface PixColCallbacks {
	onColor(classId: number, color: string): void;
	onLabel(classId: number, label: string): void;
}

/** Canvas-backed view. All document mutation goes through callbacks so
 * the owner can route edits through the API with revision checks. */
export class PixColView {
	private hover: number | null = null;
	private labelBuffer = "";

	constructor(
		private canvas: HTMLCanvasElement,
		private reference: HTMLCanvasElement,
		private status: HTMLElement,
		private callbacks: PixColCallbacks,
	) {
		this.canvas.addEventListener("mousemove", (e) => this.onMove(e));
		this.canvas.addEventListener("mouseleave", () => {
			this.hover = null;
			this.labelBuffer = "";
			this.redraw();
		});
		this.canvas.addEventListener("click", () => this.onClick());
		this.canvas.tabIndex = 0;
		this.canvas.addEventListener("keydown", (e) => this.onKey(e));
	}

	private doc: ClassificationDoc | null = null;

	setDocument(doc: ClassificationDoc): void {
		this.doc = doc;
		this.redraw();
	}

	setReferenceImage(rgba: Uint8ClampedArray, w: number, h: number): void {
		drawPixels(this.reference, rgba, w, h);
	}

	get hoverClass(): number | null {
		return this.hover;
	}

	private pixelFromEvent(e: MouseEvent): [number, number] {
		const rect = this.canvas.getBoundingClientRect();
		if (!this.doc) return [-1, -1];
		const [h, w] = this.doc.shape;
		const x = Math.floor(((e.clientX - rect.left) / rect.width) * w);
		const y = Math.floor(((e.clientY - rect.top) / rect.height) * h);
		return [x, y];
	}

	private onMove(e: MouseEvent): void {
		if (!this.doc) return;
		const [x, y] = this.pixelFromEvent(e);
		const cid = classAt(this.doc, x, y);
		if (cid !== this.hover) {
			this.hover = cid >= 0 ? cid : null;
			this.labelBuffer = "";
			this.redraw();
		}
	}

	private onClick(): void {
		if (this.doc === null || this.hover === null) return;
		const current = this.doc.classes[String(this.hover)]?.color ?? "#000000";
		const picked = window.prompt(`color for class ${this.hover} (#RRGGBB)`, current);
		if (picked) this.callbacks.onColor(this.hover, picked);
	}

	private onKey(e: KeyboardEvent): void {
		if (this.doc === null || this.hover === null) return;
		if (e.key === "Enter") {
			this.callbacks.onLabel(this.hover, this.labelBuffer);
			this.labelBuffer = "";
		} else if (e.key === "Backspace") {
			this.labelBuffer = this.labelBuffer.slice(0, -1);
		} else if (e.key.length === 1) {
			this.labelBuffer += e.key;
		}
		this.updateStatus();
	}

	private updateStatus(): void {
		if (this.doc === null || this.hover === null) {
			this.status.textContent = "";
			return;
		}
		const entry = this.doc.classes[String(this.hover)];
		const label = this.labelBuffer || entry?.label || "(unlabeled)";
		this.status.textContent = `class ${this.hover}: ${label}`;
	}

	redraw(): void {
		if (!this.doc) return;
		const [h, w] = this.doc.shape;
		drawPixels(this.canvas, buildClassImage(this.doc, this.hover), w, h);
		this.updateStatus();
	}
}

/** Nearest-neighbor blit of a small pixel buffer onto a canvas, so
 * class boundaries stay crisp at any zoom. */
export function drawPixels(
	canvas: HTMLCanvasElement,
	rgba: Uint8ClampedArray,
	w: number,
	h: number,
): void {
	const ctx = canvas.getContext("2d");
	if (!ctx) return;
	const img = new ImageData(new Uint8ClampedArray(rgba), w, h);
	const off = new OffscreenCanvas(w, h);
	const offCtx = off.getContext("2d")!;
	offCtx.putImageData(img, 0, 0);
	ctx.imageSmoothingEnabled = false;
	ctx.clearRect(0, 0, canvas.width, canvas.height);
	ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
}
