#pragma once

// Umbrella header.

#include <esgcls/classifier.hpp>
#include <esgcls/corpus.hpp>
#include <esgcls/cv.hpp>
#include <esgcls/denoise.hpp>
#include <esgcls/ensemble.hpp>
#include <esgcls/errors.hpp>
#include <esgcls/forest.hpp>
#include <esgcls/logistic.hpp>
#include <esgcls/metrics.hpp>
#include <esgcls/models.hpp>
#include <esgcls/pipeline.hpp>
#include <esgcls/rng.hpp>
#include <esgcls/selftrain.hpp>
#include <esgcls/sparse.hpp>
#include <esgcls/svm.hpp>
#include <esgcls/synth.hpp>
#include <esgcls/tfidf.hpp>
#include <esgcls/tokenizer.hpp>
#include <esgcls/tuning.hpp>
#include <esgcls/unicode.hpp>
