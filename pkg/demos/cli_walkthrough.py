"""
Command-line round trip
=======================

Render a video from a key=value description, estimate the rate, score it
against the ground truth the renderer wrote. Every output lands in
``cli_demo/``.
"""

from pathlib import Path

from breathmag.cli import main

out = Path("cli_demo")
out.mkdir(exist_ok=True)
(out / "video.txt").write_text(
    "width=64\nheight=64\nfps=30\nduration_s=60\nf0_hz=0.32\nsnr_db=10\n")

main(["synth", str(out / "video.txt"), "--seed", "1", "--out", str(out / "video.y8")])

# eta is calibrated on a noise-only video of the same size unless given
main(["estimate", str(out / "video.y8"), "--method", "phase", "--profile", "adult",
      "--out", str(out / "phase.csv")])
main(["estimate", str(out / "video.y8"), "--method", "amplitude", "--profile", "adult",
      "--out", str(out / "amp.csv")])
print((out / "phase.csv").read_text())
print("resolved config:\n" + (out / "phase.csv.config").read_text())

truth = str(out / "video.y8.truth.csv")
for name in ("phase", "amp"):
    print(f"== {name} ==")
    main(["eval", str(out / f"{name}.csv"), truth, "--out", str(out / f"{name}.report.csv")])
print("== amp, genie-aided ==")
main(["eval", str(out / "amp.csv"), truth, "--genie"])
