#pragma once

#include <saptlem/likelihood.hpp>
#include <saptlem/problem.hpp>
#include <saptlem/pt_engine.hpp>

namespace saptlem {

/**
 * Wrap a Problem as the sampler's model: flat parameter vectors in, combined
 * log-likelihood plus prediction RMSEs out. slow_ms injects an artificial
 * per-evaluation delay to emulate expensive-model regimes. The returned
 * interface is pure and safe to call from all replica workers; `problem`
 * must outlive it.
 */
ModelInterface make_lem_model(const Problem& problem, int slow_ms = 0);

} // namespace saptlem
