/** NDSP: the n-dimensional scatter plot.
 *
 * Points are the layer's pixels in R^channels, continuously rotated by
 * the client-side tour (the service route is the conformance
 * reference). Classes can be hidden to declutter, a lasso selects
 * visible points, and a selection can be reassigned to a new class to
 * repair a misclassification; the repair round-trips through the API so
 * PixCol sees it after save.
 */

import type { ClassificationDoc } from "./types.js";
import { parseHexColor } from "./pixcol.js";
import { Basis, dragAxis, grandTourStep, project } from "./projection.js";

export interface LassoPoint {
	x: number;
	y: number;
}

/** Point indices whose class is not hidden. */
export function visibleIndices(doc: ClassificationDoc): number[] {
	const hidden = new Set<number>();
	for (const [id, entry] of Object.entries(doc.classes)) {
		if (entry.hidden) hidden.add(Number(id));
	}
	const out: number[] = [];
	for (let k = 0; k < doc.assignment.length; k++) {
		if (!hidden.has(doc.assignment[k])) out.push(k);
	}
	return out;
}

/** Ray-casting point-in-polygon test. */
export function pointInPolygon(x: number, y: number, poly: LassoPoint[]): boolean {
	let inside = false;
	for (let i = 0, j = poly.length - 1; i < poly.length; j = i++) {
		const xi = poly[i].x;
		const yi = poly[i].y;
		const xj = poly[j].x;
		const yj = poly[j].y;
		const crosses =
			yi > y !== yj > y && x < ((xj - xi) * (y - yi)) / (yj - yi) + xi;
		if (crosses) inside = !inside;
	}
	return inside;
}

/** Visible points inside the lasso, as dataset point indices. */
export function lassoSelect(
	projected: Float64Array, // n x 2 row-major
	visible: number[],
	polygon: LassoPoint[],
): number[] {
	if (polygon.length < 3) return [];
	return visible.filter((k) =>
		pointInPolygon(projected[k * 2], projected[k * 2 + 1], polygon),
	);
}

export interface NdspCallbacks {
	onReassignToNew(points: number[]): void;
	onToggleHidden(classId: number, hidden: boolean): void;
}

export class NdspView {
	basis: Basis;
	private doc: ClassificationDoc | null = null;
	private points: Float32Array | null = null;
	private d = 0;
	private running = false;
	private dt = 0.02;
	private selection: number[] = [];
	private lasso: LassoPoint[] = [];
	private lassoActive = false;
	private draggedAxis: number | null = null;
	private animationHandle: number | null = null;

	constructor(
		private canvas: HTMLCanvasElement,
		private callbacks: NdspCallbacks,
		d: number,
		basis: Basis,
	) {
		this.d = d;
		this.basis = basis;
		canvas.addEventListener("mousedown", (e) => {
			// shift-drag near an axis handle steers that axis directly
			// (re-orthonormalized each move); plain drag draws a lasso
			if (e.shiftKey && this.beginAxisDrag(e)) return;
			this.lassoStart(e);
		});
		canvas.addEventListener("mousemove", (e) => {
			if (this.draggedAxis !== null) this.moveAxisDrag(e);
			else this.lassoMove(e);
		});
		canvas.addEventListener("mouseup", () => {
			if (this.draggedAxis !== null) this.draggedAxis = null;
			else this.lassoEnd();
		});
	}

	private axisRadius(): number {
		return Math.min(this.canvas.width, this.canvas.height) / 2 - 12;
	}

	private axisToProjection(e: MouseEvent): [number, number] {
		const p = this.fromCanvasEvent(e);
		const r = this.axisRadius();
		return [(p.x - this.canvas.width / 2) / r, (this.canvas.height / 2 - p.y) / r];
	}

	private beginAxisDrag(e: MouseEvent): boolean {
		const [x, y] = this.axisToProjection(e);
		let best = -1;
		let bestDist = 0.08; // grab threshold in handle space
		for (let i = 0; i < this.d; i++) {
			const dist = Math.hypot(this.basis[i][0] - x, this.basis[i][1] - y);
			if (dist < bestDist) {
				best = i;
				bestDist = dist;
			}
		}
		if (best < 0) return false;
		this.draggedAxis = best;
		return true;
	}

	private moveAxisDrag(e: MouseEvent): void {
		if (this.draggedAxis === null) return;
		const [x, y] = this.axisToProjection(e);
		this.basis = dragAxis(this.basis, this.draggedAxis, x, y);
		this.draw();
	}

	setData(doc: ClassificationDoc, points: Float32Array, d: number): void {
		this.doc = doc;
		this.points = points;
		this.d = d;
		this.draw();
	}

	get selectedPoints(): number[] {
		return [...this.selection];
	}

	/** Pause/resume keep the basis, so the trajectory continues where
	 * it stopped. */
	setRunning(run: boolean): void {
		if (run === this.running) return;
		this.running = run;
		if (run) this.tick();
		else if (this.animationHandle !== null) {
			cancelAnimationFrame(this.animationHandle);
			this.animationHandle = null;
		}
	}

	get isRunning(): boolean {
		return this.running;
	}

	private tick = (): void => {
		if (!this.running) return;
		this.basis = grandTourStep(this.basis, this.dt);
		this.draw();
		this.animationHandle = requestAnimationFrame(this.tick);
	};

	private toCanvas(x: number, y: number, scale: number): [number, number] {
		const cx = this.canvas.width / 2;
		const cy = this.canvas.height / 2;
		return [cx + x * scale, cy - y * scale];
	}

	private fromCanvasEvent(e: MouseEvent): LassoPoint {
		const rect = this.canvas.getBoundingClientRect();
		return {
			x: ((e.clientX - rect.left) / rect.width) * this.canvas.width,
			y: ((e.clientY - rect.top) / rect.height) * this.canvas.height,
		};
	}

	private lassoStart(e: MouseEvent): void {
		this.lassoActive = true;
		this.lasso = [this.fromCanvasEvent(e)];
	}

	private lassoMove(e: MouseEvent): void {
		if (!this.lassoActive) return;
		this.lasso.push(this.fromCanvasEvent(e));
		this.draw();
	}

	private lassoEnd(): void {
		if (!this.lassoActive || !this.doc || !this.points) {
			this.lassoActive = false;
			return;
		}
		this.lassoActive = false;
		const projected = project(this.points, this.d, this.basis);
		const scale = this.fitScale(projected);
		const canvasSpace = new Float64Array(projected.length);
		for (let k = 0; k < projected.length / 2; k++) {
			const [px, py] = this.toCanvas(projected[k * 2], projected[k * 2 + 1], scale);
			canvasSpace[k * 2] = px;
			canvasSpace[k * 2 + 1] = py;
		}
		this.selection = lassoSelect(canvasSpace, visibleIndices(this.doc), this.lasso);
		this.lasso = [];
		this.draw();
	}

	reassignSelectionToNewClass(): void {
		if (this.selection.length === 0) return;
		this.callbacks.onReassignToNew(this.selection);
		this.selection = [];
	}

	private fitScale(projected: Float64Array): number {
		let maxAbs = 1e-12;
		for (const v of projected) maxAbs = Math.max(maxAbs, Math.abs(v));
		return (Math.min(this.canvas.width, this.canvas.height) / 2 - 12) / maxAbs;
	}

	draw(): void {
		const ctx = this.canvas.getContext("2d");
		if (!ctx || !this.doc || !this.points) return;
		ctx.fillStyle = "#111";
		ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);
		const projected = project(this.points, this.d, this.basis);
		const scale = this.fitScale(projected);
		const selected = new Set(this.selection);
		const colorCache = new Map<number, string>();
		for (const [id, entry] of Object.entries(this.doc.classes)) {
			const [r, g, b] = parseHexColor(entry.color);
			// black classes still need to be visible on the dark canvas
			const floor = 64;
			colorCache.set(
				Number(id),
				`rgb(${Math.max(r, floor)},${Math.max(g, floor)},${Math.max(b, floor)})`,
			);
		}
		for (const k of visibleIndices(this.doc)) {
			const [px, py] = this.toCanvas(projected[k * 2], projected[k * 2 + 1], scale);
			ctx.fillStyle = selected.has(k)
				? "#ffffff"
				: colorCache.get(this.doc.assignment[k]) ?? "#888";
			ctx.fillRect(px - 1.5, py - 1.5, 3, 3);
		}
		// axis handles (shift-drag targets)
		const r = this.axisRadius();
		const cx = this.canvas.width / 2;
		const cy = this.canvas.height / 2;
		ctx.strokeStyle = "rgba(180,180,180,0.25)";
		ctx.fillStyle = "rgba(220,220,220,0.6)";
		for (let i = 0; i < this.d; i++) {
			const hx = cx + this.basis[i][0] * r;
			const hy = cy - this.basis[i][1] * r;
			ctx.beginPath();
			ctx.moveTo(cx, cy);
			ctx.lineTo(hx, hy);
			ctx.stroke();
			ctx.fillRect(hx - 1, hy - 1, 2, 2);
		}
		if (this.lasso.length > 1) {
			ctx.strokeStyle = "#eee";
			ctx.beginPath();
			ctx.moveTo(this.lasso[0].x, this.lasso[0].y);
			for (const p of this.lasso) ctx.lineTo(p.x, p.y);
			ctx.stroke();
		}
	}
}
