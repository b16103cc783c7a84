#include "ckd/cohort/synthetic.hpp"

#include <cmath>
#include <numeric>

#include <json.hpp>

#include "ckd/common/digest.hpp"
#include "ckd/common/error.hpp"
#include "ckd/common/rng.hpp"

namespace ckd {

namespace {

void check_probabilities(const CohortSchema& schema, const std::map<std::string, std::vector<double>>& probs,
                         const char* cls) {
  for (const auto& f : schema.features()) {
    const auto it = probs.find(f.name);
    if (it == probs.end()) throw ValidationError(std::string("no ") + cls + " probabilities for " + f.name);
    if (it->second.size() != f.categories.size())
      throw ValidationError(std::string(cls) + " probabilities for " + f.name + " do not match its categories");
    double sum = 0;
    for (double p : it->second) {
      if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("probability outside [0,1] for " + f.name);
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw ValidationError(std::string(cls) + " probabilities for " + f.name + " sum to " + std::to_string(sum));
  }
  for (const auto& [name, p] : probs)
    if (!schema.feature_index(name)) throw ValidationError("probabilities given for unknown feature " + name);
}

int sample(Rng& rng, const std::vector<double>& p) {
  const double u = rng.uniform();
  double acc = 0;
  for (std::size_t c = 0; c < p.size(); ++c) {
    acc += p[c];
    if (u < acc) return static_cast<int>(c);
  }
  // Rounding left u above the final cumulative sum.
  for (std::size_t c = p.size(); c-- > 0;)
    if (p[c] > 0) return static_cast<int>(c);
  return 0;
}

}  // namespace

SyntheticSpec load_marginals(const std::filesystem::path& path, const CohortSchema& schema) {
  const auto j = nlohmann::json::parse(read_text_file(path));
  SyntheticSpec spec;
  spec.n_ckd = j.at("n_ckd").get<std::size_t>();
  spec.n_nonckd = j.at("n_nonckd").get<std::size_t>();
  for (const auto& f : schema.features()) {
    if (!j.at("features").contains(f.name)) throw ValidationError("marginals file lacks feature " + f.name);
    const auto& entry = j.at("features").at(f.name);
    auto to_probs = [&](const char* key, std::size_t n) {
      std::vector<double> p;
      const auto& counts = entry.at(key);
      for (const auto& cat : f.categories) {
        if (!counts.contains(cat)) throw ValidationError("marginals for " + f.name + " lack category " + cat);
        p.push_back(counts.at(cat).get<double>() / static_cast<double>(n));
      }
      return p;
    };
    spec.p_ckd[f.name] = to_probs("ckd", spec.n_ckd);
    spec.p_nonckd[f.name] = to_probs("nonckd", spec.n_nonckd);
  }
  return spec;
}

SyntheticSpec marginals_spec(const CohortSchema& schema, std::uint64_t seed) {
  auto spec = load_marginals(source_data_dir() / "synthetic" / "cohort_marginals.json", schema);
  spec.seed = seed;
  return spec;
}

Cohort synthesize_cohort(const CohortSchema& schema, const SyntheticSpec& spec) {
  check_probabilities(schema, spec.p_ckd, "CKD");
  check_probabilities(schema, spec.p_nonckd, "non-CKD");
  const std::size_t n = spec.n_ckd + spec.n_nonckd;
  if (n == 0) throw ValidationError("synthetic cohort must have at least one row");
  Rng rng(spec.seed);
  std::vector<int> labels(n, 0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(spec.n_ckd), 1);
  rng.shuffle(std::span<int>(labels));

  const auto& features = schema.features();
  std::vector<const std::vector<double>*> pc;
  std::vector<const std::vector<double>*> pn;
  for (const auto& f : features) {
    pc.push_back(&spec.p_ckd.at(f.name));
    pn.push_back(&spec.p_nonckd.at(f.name));
  }
  std::vector<std::vector<int>> rows(n, std::vector<int>(features.size()));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t f = 0; f < features.size(); ++f) rows[r][f] = sample(rng, labels[r] ? *pc[f] : *pn[f]);
  std::vector<std::size_t> present(features.size());
  std::iota(present.begin(), present.end(), 0);
  return Cohort(schema, std::move(present), std::move(rows), std::move(labels),
                {"synthetic", "synthetic:seed=" + std::to_string(spec.seed)});
}

}  // namespace ckd
