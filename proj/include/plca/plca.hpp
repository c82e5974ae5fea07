#pragma once

// Probabilistic latent component analysis: empirical distributions over
// event x group tables, the latent-class factorization
// P(e,g) = P(g) sum_z P(e|z) P(z|g), its EM fitting loop, divergence
// evaluation, the generative sampler, brute-force oracles and file formats.

#include "plca/corpus.hpp"
#include "plca/em.hpp"
#include "plca/empirical.hpp"
#include "plca/error.hpp"
#include "plca/io.hpp"
#include "plca/matrix.hpp"
#include "plca/model.hpp"
#include "plca/objective.hpp"
#include "plca/reference.hpp"
#include "plca/rng.hpp"
#include "plca/sampler.hpp"
