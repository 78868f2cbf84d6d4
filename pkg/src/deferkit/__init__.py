"""deferkit: selective prediction with calibrated deferral and guided review.

Submodules:

* core        -- dataset model, ingestion, splits
* guidance    -- canonical dialectic guidance format (parse/emit)
* hidden      -- hidden-state pooling and the pooled-embedding classifier
* fusion      -- blending the verbalised and hidden-state probabilities
* calibration -- binning, ECE/ACE and the imbalance-weighted ECE
* deferral    -- relative-confidence ranking, partitions, ARC/AUARC
* guardrail   -- acceptance gate for candidate guidance texts
* evaluation  -- classification metrics and nonparametric tests
* report      -- the run-report document shared by CLI and service
* service     -- HTTP review service with an append-only event log
* fixtures    -- synthetic dataset generation
* cli         -- command-line entry point
"""

__version__ = "0.1.0"
