#pragma once

// Convolutional sparse kit: shift-invariant clustering, convolutional
// dictionary learning, and the benchmark pipeline built on them.

#include "csk/atom_match.hpp"
#include "csk/clustering.hpp"
#include "csk/config_count.hpp"
#include "csk/configfile.hpp"
#include "csk/conv_bpdn.hpp"
#include "csk/correlation.hpp"
#include "csk/datasets.hpp"
#include "csk/dict_update.hpp"
#include "csk/dictionary.hpp"
#include "csk/distances.hpp"
#include "csk/error.hpp"
#include "csk/experiment.hpp"
#include "csk/features.hpp"
#include "csk/fft.hpp"
#include "csk/gabor.hpp"
#include "csk/hungarian.hpp"
#include "csk/omp.hpp"
#include "csk/parallel.hpp"
#include "csk/patches.hpp"
#include "csk/pooling.hpp"
#include "csk/rng.hpp"
#include "csk/serialize.hpp"
#include "csk/sparse_code.hpp"
#include "csk/svm.hpp"
#include "csk/synth.hpp"
#include "csk/tensor.hpp"
