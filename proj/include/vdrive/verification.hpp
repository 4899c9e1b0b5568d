#pragma once

// Finite-difference verification of every differentiable op and every agent
// update objective, on small random instances.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "vdrive/env.hpp"
#include "vdrive/nn/encoder.hpp"
#include "vdrive/nn/grad_check.hpp"

namespace vdrive {

struct GradCheckCase {
  std::string name;
  std::uint64_t seed = 0;
  nn::GradCheckReport report;
};

inline constexpr double kGradCheckTolerance = 1e-4;
inline constexpr std::array<double, 3> kGradCheckSteps{1e-4, 1e-5, 1e-6};

/// Small encoder used by the checks: 8×8 input, two conv stages.
nn::EncoderSpec tiny_encoder_spec();

/// Observation with uniform random channels and in-range scalars.
Observation random_observation(const nn::EncoderSpec& spec, const EnvConfig& env, Rng& rng);

/// Runs every case for seeds base_seed .. base_seed + seeds − 1.
std::vector<GradCheckCase> run_gradcheck_suite(int seeds, std::uint64_t base_seed = 1);

}  // namespace vdrive
