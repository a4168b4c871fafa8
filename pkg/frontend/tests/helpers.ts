import { inject } from "vitest";

import { WorkbenchClient } from "../src/api.js";
import type { ClassificationEnvelope } from "../src/types.js";

export function client(): WorkbenchClient {
	return new WorkbenchClient(inject("workbenchUrl"));
}

export interface ClusteredFixture {
	api: WorkbenchClient;
	session: string;
	mazeId: string;
	trace: string;
	layer: string;
	classificationId: string;
	envelope: ClassificationEnvelope;
	/** points row-major (n x d) plus d, decoded from the layer tensor */
	points: Float32Array;
	d: number;
}

/** session -> maze -> forward(capture) -> kmeans job -> classification */
export async function makeClusteredFixture(
	layer = "block2.res1.resadd",
	k = 5,
): Promise<ClusteredFixture> {
	const api = client();
	const session = await api.createSession();
	const maze = await api.generateMaze(session, 42, 15);
	const fwd = await api.forward(session, maze.id, [layer]);
	const job = await api.startCluster(session, fwd.trace, layer, "kmeans", {
		k,
		seed: 1,
	});
	const done = await api.waitForJob(session, job);
	if (done.status !== "done" || !done.classification) {
		throw new Error(`cluster job failed: ${JSON.stringify(done)}`);
	}
	const envelope = await api.getClassification(session, done.classification);
	const tensor = await api.layerTensor(session, fwd.trace, layer);
	const [c, h, w] = tensor.dims;
	const points = new Float32Array(h * w * c);
	for (let ch = 0; ch < c; ch++) {
		for (let kk = 0; kk < h * w; kk++) {
			points[kk * c + ch] = tensor.data[ch * h * w + kk];
		}
	}
	return {
		api,
		session,
		mazeId: maze.id,
		trace: fwd.trace,
		layer,
		classificationId: done.classification,
		envelope,
		points,
		d: c,
	};
}
