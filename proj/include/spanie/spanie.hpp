#pragma once

// Umbrella header.

#include "spanie/adam.hpp"
#include "spanie/aggregation.hpp"
#include "spanie/autodiff.hpp"
#include "spanie/bench.hpp"
#include "spanie/bio.hpp"
#include "spanie/checkpoint.hpp"
#include "spanie/config.hpp"
#include "spanie/dataset.hpp"
#include "spanie/encoder.hpp"
#include "spanie/errors.hpp"
#include "spanie/inference.hpp"
#include "spanie/joint_model.hpp"
#include "spanie/losses.hpp"
#include "spanie/manifest.hpp"
#include "spanie/metrics.hpp"
#include "spanie/ner_head.hpp"
#include "spanie/pairwise_model.hpp"
#include "spanie/predictions_io.hpp"
#include "spanie/rng.hpp"
#include "spanie/span_head.hpp"
#include "spanie/synthetic.hpp"
#include "spanie/tokenize.hpp"
#include "spanie/trainer.hpp"
#include "spanie/types.hpp"
#include "spanie/version.hpp"
#include "spanie/vocab.hpp"
#include "spanie/windowing.hpp"
