"""Walkthrough: train a one-class model and scan a defective surface.

Generates a noisy striped texture, trains on a clean instance, injects a
rotated patch into a fresh instance, and runs detection. Artifacts (images,
model file, window report, overlay) land in demos/output/.

Run:  python3 demos/02_train_and_detect.py
"""

from __future__ import annotations

import json
import os

from defectscan import (
    TrainConfig,
    detect,
    inject_defect,
    load_model,
    render_overlay,
    save_image,
    save_model,
    synth_texture,
    train,
    write_report,
)

OUT = os.path.join(os.path.dirname(__file__), "output")


def main():
    os.makedirs(OUT, exist_ok=True)

    # a clean reference surface: vertical stripes plus sensor-ish noise
    clean = synth_texture("stripes", period=8, size=256, noise=8.0, seed=1)
    save_image(clean, os.path.join(OUT, "training.png"))

    config = TrainConfig(levels=32, window=32)
    model = train([clean], config)
    model_path = os.path.join(OUT, "model.json")
    save_model(model, model_path)
    print(f"trained on {model.trained_windows} windows, "
          f"threshold {model.threshold:.6f}")

    # sanity: the training surface itself must come back fully healthy
    self_scan = detect(clean, model)
    print(f"self-scan: {self_scan.defective_count} defective of "
          f"{self_scan.rows * self_scan.cols} windows")

    # a new instance of the same texture, with a rotated square patch
    test = synth_texture("stripes", period=8, size=256, noise=8.0, seed=2)
    defective, mask = inject_defect(test, (96, 96, 64, 64), "rotate90")
    save_image(defective, os.path.join(OUT, "test_defective.png"))
    save_image(mask, os.path.join(OUT, "test_mask.png"))

    # models are self-describing files; reload to prove the round trip
    result = detect(defective, load_model(model_path))
    print(f"defect scan: {result.defective_count} windows flagged")
    for verdict in result.verdicts():
        if verdict.defective:
            print(f"  window ({verdict.row}, {verdict.col}) "
                  f"distance {verdict.distance:.4f} > {result.threshold:.4f}")

    report_path = os.path.join(OUT, "report.json")
    write_report(result, report_path)
    render_overlay(defective, result, os.path.join(OUT, "overlay.png"))
    rows = json.load(open(report_path))["rows"]
    print(f"report ({rows}x{rows} grid) and overlay written to {OUT}/")


if __name__ == "__main__":
    main()
