#include "ckd/models/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ckd/common/error.hpp"
#include "ckd/common/rng.hpp"

namespace ckd {

using nlohmann::json;

namespace {

constexpr std::size_t kStartupTrials = 10;
constexpr std::size_t kCandidates = 24;

// Parameter values live on [0,1] internally; log domains are uniform in log.
double to_unit(const ParamDomain& d, const ParamValue& v) {
  if (d.type == ParamType::Categorical) {
    const auto& s = std::get<std::string>(v);
    const auto it = std::find(d.choices.begin(), d.choices.end(), s);
    return static_cast<double>(it - d.choices.begin());
  }
  const double x = std::holds_alternative<double>(v) ? std::get<double>(v) : static_cast<double>(std::get<std::int64_t>(v));
  if (d.high <= d.low) return 0.5;
  if (d.log) return (std::log(x) - std::log(d.low)) / (std::log(d.high) - std::log(d.low));
  return (x - d.low) / (d.high - d.low);
}

ParamValue from_unit(const ParamDomain& d, double u) {
  // Categorical coordinates are choice indices.
  if (d.type == ParamType::Categorical) return d.choices.at(static_cast<std::size_t>(u));
  u = std::clamp(u, 0.0, 1.0);
  double x = d.log ? std::exp(std::log(d.low) + u * (std::log(d.high) - std::log(d.low))) : d.low + u * (d.high - d.low);
  if (d.type == ParamType::Int) {
    const auto i = static_cast<std::int64_t>(std::llround(x));
    return std::clamp<std::int64_t>(i, static_cast<std::int64_t>(std::ceil(d.low)),
                                    static_cast<std::int64_t>(std::floor(d.high)));
  }
  return std::clamp(x, d.low, d.high);
}

ParamValue sample_uniform(const ParamDomain& d, Rng& rng) {
  if (d.type == ParamType::Categorical) return d.choices[rng.below(d.choices.size())];
  return from_unit(d, rng.uniform());
}

// Parzen density over a numeric unit coordinate: a uniform prior component
// plus one truncated Gaussian per observation.
struct Parzen {
  std::vector<double> mu;
  double sigma = 1;

  explicit Parzen(std::vector<double> obs) : mu(std::move(obs)) {
    const double n = static_cast<double>(mu.size());
    double mean = 0;
    for (double m : mu) mean += m;
    mean /= std::max(n, 1.0);
    double var = 0;
    for (double m : mu) var += (m - mean) * (m - mean);
    const double sd = mu.size() > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    sigma = std::clamp(1.06 * std::max(sd, 0.1) * std::pow(n + 1, -0.2), 0.05, 1.0);
  }

  [[nodiscard]] double density(double u) const {
    double s = 1.0;  // uniform prior on [0,1]
    for (double m : mu) {
      const double z = (u - m) / sigma;
      const double mass = 0.5 * (std::erf((1 - m) / (sigma * std::numbers::sqrt2)) -
                                 std::erf((0 - m) / (sigma * std::numbers::sqrt2)));
      s += std::exp(-0.5 * z * z) / (sigma * std::sqrt(2 * std::numbers::pi) * mass);
    }
    return s / static_cast<double>(mu.size() + 1);
  }

  double sample(Rng& rng) const {
    const auto c = rng.below(mu.size() + 1);
    if (c == mu.size()) return rng.uniform();
    for (int attempt = 0; attempt < 100; ++attempt) {
      const double u = mu[c] + sigma * rng.normal();
      if (u >= 0 && u <= 1) return u;
    }
    return mu[c];
  }
};

struct Categorical {
  std::vector<double> p;

  Categorical(std::size_t k, const std::vector<double>& obs) : p(k, 1.0) {
    for (double o : obs) p[static_cast<std::size_t>(o)] += 1.0;
    double s = 0;
    for (double v : p) s += v;
    for (double& v : p) v /= s;
  }

  std::size_t sample(Rng& rng) const {
    double u = rng.uniform();
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (u < p[i]) return i;
      u -= p[i];
    }
    return p.size() - 1;
  }
};

Params tpe_suggest(const SearchSpace& space, const std::vector<Trial>& trials, Rng& rng) {
  std::vector<std::size_t> order(trials.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return trials[a].score > trials[b].score; });
  const std::size_t n_good =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(trials.size()))), 1, 25);

  struct Dim {
    const ParamDomain* d;
    std::vector<double> good;
    std::vector<double> bad;
  };
  std::vector<Dim> dims;
  for (const auto& d : space.params) {
    Dim dim{&d, {}, {}};
    for (std::size_t r = 0; r < order.size(); ++r) {
      const double u = to_unit(d, trials[order[r]].params.at(d.name));
      (r < n_good ? dim.good : dim.bad).push_back(u);
    }
    dims.push_back(std::move(dim));
  }

  std::vector<double> best_u(dims.size());
  double best_score = -INFINITY;
  for (std::size_t c = 0; c < kCandidates; ++c) {
    std::vector<double> cand(dims.size());
    double score = 0;
    for (std::size_t j = 0; j < dims.size(); ++j) {
      const auto& dim = dims[j];
      if (dim.d->type == ParamType::Categorical) {
        Categorical l(dim.d->choices.size(), dim.good);
        Categorical g(dim.d->choices.size(), dim.bad);
        const auto k = l.sample(rng);
        cand[j] = static_cast<double>(k);
        score += std::log(l.p[k]) - std::log(g.p[k]);
      } else {
        Parzen l(dim.good);
        Parzen g(dim.bad);
        cand[j] = l.sample(rng);
        score += std::log(l.density(cand[j])) - std::log(g.density(cand[j]));
      }
    }
    if (score > best_score) {
      best_score = score;
      best_u = cand;
    }
  }
  Params out;
  for (std::size_t j = 0; j < dims.size(); ++j) out[dims[j].d->name] = from_unit(*dims[j].d, best_u[j]);
  return out;
}

}  // namespace

json TuneResult::trial_log() const {
  json trials_json = json::array();
  for (const auto& t : trials)
    trials_json.push_back({{"index", t.index}, {"params", params_to_json(t.params)}, {"score", t.score}});
  return {{"best_trial", best_trial}, {"best", best.to_json()}, {"trials", trials_json}};
}

TuneResult tune(std::string_view kind, const Matrix& X, std::span<const int> y, const SearchBudget& budget,
                const CvProtocol& cv, const SearchSpace& space, std::uint64_t model_seed, ClassWeighting weighting) {
  if (budget.n_trials < 1) throw ValidationError("search budget needs at least one trial");
  if (space.params.empty()) throw ValidationError("search space is empty for " + std::string(kind));
  const auto folds = stratified_folds(y, cv.k, cv.seed);

  TuneResult result;
  double best_score = -INFINITY;
  for (std::size_t t = 0; t < budget.n_trials; ++t) {
    Rng rng(derive_seed(budget.seed, t));
    Params p;
    if (t == 0) {
      for (const auto& d : space.params) p[d.name] = d.default_value;
    } else if (budget.sampler == Sampler::Random || t < kStartupTrials) {
      for (const auto& d : space.params) p[d.name] = sample_uniform(d, rng);
    } else {
      p = tpe_suggest(space, result.trials, rng);
    }
    const auto spec = make_classifier(kind, p, model_seed, weighting);
    const auto cvr = cross_validate(spec, X, y, folds, cv);
    const double score = cvr.summary.get(Metric::BalancedAccuracy).mean;
    result.trials.push_back({t, p, score});
    if (score > best_score) {
      best_score = score;
      result.best = spec;
      result.best_trial = t;
    }
  }
  return result;
}

TuneResult tune(std::string_view kind, const Matrix& X, std::span<const int> y, const SearchBudget& budget,
                const CvProtocol& cv, std::uint64_t model_seed, ClassWeighting weighting) {
  return tune(kind, X, y, budget, cv, SearchSpaceCatalog::builtin().at(classifier_kind(kind).name), model_seed,
              weighting);
}

}  // namespace ckd
