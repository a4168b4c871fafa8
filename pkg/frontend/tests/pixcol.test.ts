/** PixCol conformance: initial black view, hover highlighting, and
 * persistence of color/label edits across a reload. */

import { describe, expect, it } from "vitest";

import { buildClassImage, classAt, classCounts, parseHexColor } from "../src/pixcol.js";
import type { ClassificationDoc } from "../src/types.js";
import { makeClusteredFixture } from "./helpers.js";

function syntheticDoc(): ClassificationDoc {
	return {
		version: 1,
		layer: "block1.conv",
		shape: [2, 3, 64],
		assignment: [0, 0, 1, 1, 2, 2],
		classes: {
			"0": { label: "", color: "#000000", hidden: false },
			"1": { label: "", color: "#000000", hidden: false },
			"2": { label: "", color: "#000000", hidden: false },
		},
	};
}

describe("pixel image building", () => {
	it("classAt maps pixels to assignment entries", () => {
		const doc = syntheticDoc();
		expect(classAt(doc, 0, 0)).toBe(0);
		expect(classAt(doc, 2, 0)).toBe(1);
		expect(classAt(doc, 2, 1)).toBe(2);
		expect(classAt(doc, 5, 0)).toBe(-1);
	});

	it("hover highlight paints exactly the hovered class white", () => {
		const doc = syntheticDoc();
		const img = buildClassImage(doc, 1);
		for (let k = 0; k < doc.assignment.length; k++) {
			const white = doc.assignment[k] === 1;
			expect(img[k * 4]).toBe(white ? 255 : 0);
			expect(img[k * 4 + 1]).toBe(white ? 255 : 0);
			expect(img[k * 4 + 2]).toBe(white ? 255 : 0);
			expect(img[k * 4 + 3]).toBe(255);
		}
	});

	it("parseHexColor handles the interchange format", () => {
		expect(parseHexColor("#FF0180")).toEqual([255, 1, 128]);
		expect(() => parseHexColor("red")).toThrow();
	});

	it("classCounts conserves the pixel total", () => {
		const counts = classCounts(syntheticDoc());
		let total = 0;
		for (const v of counts.values()) total += v;
		expect(total).toBe(6);
	});
});

describe("PixCol over the API", () => {
	it("a fresh classification renders fully black", async () => {
		const fx = await makeClusteredFixture();
		const doc = fx.envelope.document;
		for (const entry of Object.values(doc.classes)) {
			expect(entry.color).toBe("#000000");
		}
		const img = buildClassImage(doc);
		for (let i = 0; i < img.length; i += 4) {
			expect(img[i]).toBe(0);
			expect(img[i + 1]).toBe(0);
			expect(img[i + 2]).toBe(0);
			expect(img[i + 3]).toBe(255);
		}
	});

	it("hover highlights every pixel of the hovered class", async () => {
		const fx = await makeClusteredFixture();
		const doc = fx.envelope.document;
		const hovered = doc.assignment[0];
		const img = buildClassImage(doc, hovered);
		for (let k = 0; k < doc.assignment.length; k++) {
			const expectWhite = doc.assignment[k] === hovered;
			expect(img[k * 4] === 255 && img[k * 4 + 1] === 255).toBe(expectWhite);
		}
	});

	it("color and label assignments survive a reload", async () => {
		const fx = await makeClusteredFixture();
		const doc = fx.envelope.document;
		doc.classes["0"].color = "#FF0000";
		doc.classes["0"].label = "walls";
		const put = await fx.api.putClassification(
			fx.session,
			fx.classificationId,
			doc,
			fx.envelope.rev,
		);
		expect(put.rev).toBe(fx.envelope.rev + 1);

		// simulate a page reload: fetch fresh and rebuild the image
		const reloaded = await fx.api.getClassification(fx.session, fx.classificationId);
		expect(reloaded.document.classes["0"].color).toBe("#FF0000");
		expect(reloaded.document.classes["0"].label).toBe("walls");
		const img = buildClassImage(reloaded.document);
		for (let k = 0; k < reloaded.document.assignment.length; k++) {
			if (reloaded.document.assignment[k] === 0) {
				expect(img[k * 4]).toBe(255);
				expect(img[k * 4 + 1]).toBe(0);
				expect(img[k * 4 + 2]).toBe(0);
			}
		}
	});

	it("stale writes are rejected with a 409", async () => {
		const fx = await makeClusteredFixture();
		const doc = fx.envelope.document;
		await fx.api.putClassification(fx.session, fx.classificationId, doc, fx.envelope.rev);
		await expect(
			fx.api.putClassification(fx.session, fx.classificationId, doc, fx.envelope.rev),
		).rejects.toMatchObject({ status: 409, code: "conflict" });
	});
});
