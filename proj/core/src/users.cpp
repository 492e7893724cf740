#include "flicksim/users.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "flicksim/rng.hpp"

namespace flicksim {

namespace {

// MovieLens-100k occupation list, minus "other".
const char* kOccupations[] = {
    "administrator", "artist",     "doctor",    "educator",  "engineer",
    "entertainment", "executive",  "healthcare", "homemaker", "lawyer",
    "librarian",     "marketing",  "programmer", "retired",   "salesman",
    "scientist",     "student",    "technician", "writer"};

const char* kGenders[] = {"F", "M", "NB"};
const double kGenderWeights[] = {0.49, 0.49, 0.02};

}  // namespace

std::vector<UserProfile> synthesize_users(std::size_t n,
                                          const RatingsCorpus& corpus,
                                          const DemographicsParams& params,
                                          std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("synthesize_users: n < 1");
  auto corpus_ids = corpus.user_ids();

  // Lognormal shifted so the configured mean is the distribution mean.
  const double s = params.activity_sigma;
  const double mu_log = std::log(params.activity_mean) - 0.5 * s * s;

  std::vector<UserProfile> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = substream(seed, "user-synth", i);
    UserProfile p;
    p.user_id = i < corpus_ids.size() ? corpus_ids[i]
                                      : "synth_" + std::to_string(i);
    double age = rng.normal(params.age_mean, params.age_stddev);
    p.true_age = static_cast<int>(std::clamp(
        std::round(age), static_cast<double>(params.age_min),
        static_cast<double>(params.age_max)));
    p.age = p.true_age;
    double g = rng.uniform();
    p.gender = g < kGenderWeights[0]                     ? kGenders[0]
               : g < kGenderWeights[0] + kGenderWeights[1] ? kGenders[1]
                                                           : kGenders[2];
    p.occupation = kOccupations[rng.uniform_index(std::size(kOccupations))];
    p.activity_level = std::exp(rng.normal(mu_log, s));
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace flicksim
