#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flicksim/corpus.hpp"

namespace flicksim {

struct UserProfile {
  std::string user_id;
  int age = 0;  // reported; may diverge from true_age only via chaos
  std::string gender;
  std::string occupation;
  double activity_level = 1.0;  // expected sessions/day multiplier
  int true_age = 0;             // immutable after synthesis, drives nothing
                                // observable but kept for audit comparison
  bool operator==(const UserProfile&) const = default;
};

struct DemographicsParams {
  int age_min = 13;
  int age_max = 80;
  double age_mean = 33.0;
  double age_stddev = 12.0;
  double activity_mean = 1.0;
  double activity_sigma = 0.5;  // lognormal shape
  bool operator==(const DemographicsParams&) const = default;
};

// n profiles, deterministic for a fixed seed. Ids reuse corpus user ids
// first (first-seen order); the overflow gets synthetic ids.
std::vector<UserProfile> synthesize_users(std::size_t n,
                                          const RatingsCorpus& corpus,
                                          const DemographicsParams& params,
                                          std::uint64_t seed);

}  // namespace flicksim
