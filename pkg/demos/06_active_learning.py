"""Certainty-sampling simulation: how much must a reviewer screen?

Each run seeds the labels with 5 relevant and 45 irrelevant citations,
then repeatedly reveals the 50 highest-scored hidden citations until all
relevant ones surface.  Emits the screened-fraction histogram and an
inclusion curve as SVG.
"""

import tempfile
import warnings
from pathlib import Path

import numpy as np

from screenkit import ALConfig, screened_histogram, simulate, simulate_run
from screenkit.methods import METHODS, FeatureContext
from screenkit.report import histogram_svg, polyline_svg
from screenkit.synth import SynthSpec, make_corpus, make_separable_corpus

warnings.simplefilter("ignore", UserWarning)
out = Path(tempfile.mkdtemp())

# %% A clean pool: 1200 citations, 5% relevant, wide margin.
clean = make_separable_corpus(1200, 60, seed=2, name="clean")
context = FeatureContext.build(clean, dim=48)
config = ALConfig(repeats=10, method=METHODS[21], seed=0)
result = simulate(clean, config, context)
print(f"clean pool: mean screened fraction {result.mean_fraction:.1%} over 10 runs")

# %% A harder pool: overlapping topics at 4% prevalence.
hard = make_corpus(SynthSpec(n=1200, n_relevant=48, lean=0.72, name="hard"), seed=4)
ctx_hard = FeatureContext.build(hard, dim=48)
res_hard = simulate(hard, ALConfig(repeats=10, method=METHODS[21], seed=0), ctx_hard)
print(f"hard pool:  mean screened fraction {res_hard.mean_fraction:.1%} over 10 runs")

counts, edges = screened_histogram([result.mean_fraction, res_hard.mean_fraction])
(out / "histogram.svg").write_text(histogram_svg(counts, edges))

# %% Inclusion curve of a single run on the hard pool.
trace = simulate_run(hard, ALConfig(repeats=1, method=METHODS[21], seed=0),
                     ctx_hard, run_seed=7)
curve = trace.inclusion_curve()
(out / "inclusion_curve.svg").write_text(polyline_svg(
    curve, "Remaining relevant citations while screening",
    "citations screened", "remaining relevant"))
third = np.searchsorted(np.asarray(trace.screened), len(hard) / 3)
third = min(third, len(trace.found) - 1)
print(f"single hard run: all {hard.n_relevant} relevant found after screening "
      f"{trace.screened[-1]} of {len(hard)} citations; "
      f"{trace.found[third]} of them within the first third")
print(f"SVGs written to {out}")
