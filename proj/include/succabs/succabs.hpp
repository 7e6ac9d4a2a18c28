#pragma once

#include "succabs/corpus.hpp"
#include "succabs/counts.hpp"
#include "succabs/error.hpp"
#include "succabs/evaluation.hpp"
#include "succabs/lexicon.hpp"
#include "succabs/model_io.hpp"
#include "succabs/smoothing.hpp"
#include "succabs/tagger.hpp"
#include "succabs/util.hpp"
