/** Client-side view state.
 *
 * The classification held here is always a fetched version or a locally
 * edited descendant pending PUT; the revision travels with it and the
 * service rejects stale writes. Mutations per classification are queued
 * so at most one is in flight.
 */

import { ApiError, WorkbenchClient } from "./api.js";
import type { ClassificationDoc, MazeInfo } from "./types.js";

export class ViewState {
	session = "";
	maze: MazeInfo | null = null;
	trace: string | null = null;
	layer = "block1.conv";
	classificationId: string | null = null;
	classification: ClassificationDoc | null = null;
	rev = 0;
	hoverClass: number | null = null;
	selection: number[] = [];

	private mutationQueue: Promise<unknown> = Promise.resolve();

	constructor(
		public api: WorkbenchClient,
		public onConflict: () => void = () => {},
	) {}

	async init(): Promise<void> {
		this.session = await this.api.createSession();
	}

	async loadClassification(cid: string): Promise<ClassificationDoc> {
		const env = await this.api.getClassification(this.session, cid);
		this.classificationId = cid;
		this.classification = env.document;
		this.rev = env.rev;
		return env.document;
	}

	/** Serialize mutations; a 409 means someone else advanced the
	 * classification and the caller must reload. */
	enqueueMutation<T>(fn: () => Promise<T>): Promise<T> {
		const next = this.mutationQueue.then(fn, fn);
		this.mutationQueue = next.catch(() => undefined);
		return next;
	}

	async saveClassification(): Promise<void> {
		const cid = this.classificationId;
		const doc = this.classification;
		if (!cid || !doc) return;
		await this.enqueueMutation(async () => {
			try {
				const r = await this.api.putClassification(this.session, cid, doc, this.rev);
				this.rev = r.rev;
			} catch (err) {
				if (err instanceof ApiError && err.status === 409) {
					this.onConflict();
					return;
				}
				throw err;
			}
		});
	}

	setClassColor(classId: number, color: string): void {
		const entry = this.classification?.classes[String(classId)];
		if (entry) entry.color = color;
	}

	setClassLabel(classId: number, label: string): void {
		const entry = this.classification?.classes[String(classId)];
		if (entry) entry.label = label;
	}

	setClassHidden(classId: number, hidden: boolean): void {
		const entry = this.classification?.classes[String(classId)];
		if (entry) entry.hidden = hidden;
	}
}
