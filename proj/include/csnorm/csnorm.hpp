#pragma once

#include "csnorm/align.hpp"
#include "csnorm/binary_io.hpp"
#include "csnorm/candidates.hpp"
#include "csnorm/config.hpp"
#include "csnorm/conllu.hpp"
#include "csnorm/corpus.hpp"
#include "csnorm/error.hpp"
#include "csnorm/eval.hpp"
#include "csnorm/experiment.hpp"
#include "csnorm/forest.hpp"
#include "csnorm/hash.hpp"
#include "csnorm/lid.hpp"
#include "csnorm/parallel.hpp"
#include "csnorm/pos.hpp"
#include "csnorm/projection.hpp"
#include "csnorm/ranker.hpp"
#include "csnorm/resources.hpp"
#include "csnorm/rng.hpp"
#include "csnorm/seqlab.hpp"
#include "csnorm/unicode.hpp"
