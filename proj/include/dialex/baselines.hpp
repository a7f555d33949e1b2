// Copyright 2026 The dialex Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dialex/dataset.hpp"
#include "dialex/error.hpp"
#include "dialex/label.hpp"
#include "dialex/random.hpp"
#include "dialex/unicode.hpp"

namespace dialex {

// Set of all length-n substrings, counted in code points.
inline std::set<std::u32string> char_ngrams(std::u32string_view s, std::size_t n) {
  if (n == 0) throw ValidationError("n-gram order must be positive");
  std::set<std::u32string> out;
  if (s.size() < n) return out;
  for (std::size_t i = 0; i + n <= s.size(); ++i) out.emplace(s.substr(i, n));
  return out;
}

inline std::set<std::u32string> char_ngrams(std::string_view utf8, std::size_t n) {
  return char_ngrams(std::u32string_view(unicode::decode(utf8)), n);
}

template <typename T>
double jaccard(const std::set<T>& a, const std::set<T>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++inter, ++i, ++j;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

inline constexpr std::size_t kFeatureCount = 4;
using FeatureVector = std::array<double, kFeatureCount>;  // ld, jac2, jac3, bias

inline FeatureVector features(std::string_view lemma, std::string_view term, std::size_t distance) {
  const auto a = unicode::decode(lemma);
  const auto b = unicode::decode(term);
  return {static_cast<double>(distance), jaccard(char_ngrams(std::u32string_view(a), 2), char_ngrams(std::u32string_view(b), 2)),
          jaccard(char_ngrams(std::u32string_view(a), 3), char_ngrams(std::u32string_view(b), 3)), 1.0};
}

inline FeatureVector features(const DatasetItem& item) {
  return features(item.lemma, item.term, item.distance);
}

inline Label predict_random(std::mt19937_64& rng) {
  return kAllLabels[uniform_index(rng, kLabelCount)];
}

inline Label predict_ld_threshold(std::size_t distance, std::size_t threshold = 2) {
  return distance <= threshold ? Label::kYes : Label::kNo;
}

inline Label predict_ld_threshold(const DatasetItem& item) { return predict_ld_threshold(item.distance); }

inline Label predict_majority(const DatasetItem&) { return Label::kNo; }

using Weights = std::array<FeatureVector, kLabelCount>;

struct LogRegParams {
  double learning_rate = 0.1;
  std::size_t max_iterations = 5000;
  double l2 = 1e-4;
  double tolerance = 1e-7;  // stop once the largest gradient entry is below this
};

struct LogRegModel {
  Weights weights{};
  std::array<double, kFeatureCount - 1> mean{};
  std::array<double, kFeatureCount - 1> scale{1.0, 1.0, 1.0};
  LogRegParams params;
  std::size_t iterations = 0;
  double final_loss = 0.0;
  bool converged = false;

  FeatureVector standardize(const FeatureVector& x) const {
    FeatureVector z = x;
    for (std::size_t f = 0; f + 1 < kFeatureCount; ++f) z[f] = (x[f] - mean[f]) / scale[f];
    return z;
  }
};

inline std::array<double, kLabelCount> softmax(const Weights& w, const FeatureVector& x) {
  std::array<double, kLabelCount> logits{};
  for (std::size_t k = 0; k < kLabelCount; ++k) {
    for (std::size_t f = 0; f < kFeatureCount; ++f) logits[k] += w[k][f] * x[f];
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (auto& l : logits) {
    l = std::exp(l - m);
    sum += l;
  }
  for (auto& l : logits) l /= sum;
  return logits;
}

// First maximum in label order, so exact ties resolve yes > inflected > no.
inline Label argmax_label(const std::array<double, kLabelCount>& p) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < kLabelCount; ++k) {
    if (p[k] > p[best]) best = k;
  }
  return kAllLabels[best];
}

struct LossAndGradient {
  double loss = 0.0;
  Weights gradient{};
};

// Mean cross-entropy plus (l2 / 2) * |W|^2 over the non-bias weights.
inline LossAndGradient loss_and_gradient(const Weights& w, std::span<const FeatureVector> x,
                                         std::span<const Label> y, double l2) {
  LossAndGradient out;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto p = softmax(w, x[i]);
    const std::size_t yi = index(y[i]);
    out.loss -= std::log(std::max(p[yi], 1e-300));
    for (std::size_t k = 0; k < kLabelCount; ++k) {
      const double r = p[k] - (k == yi ? 1.0 : 0.0);
      for (std::size_t f = 0; f < kFeatureCount; ++f) out.gradient[k][f] += r * x[i][f];
    }
  }
  out.loss /= n;
  for (std::size_t k = 0; k < kLabelCount; ++k) {
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      out.gradient[k][f] /= n;
      if (f + 1 < kFeatureCount) {
        out.loss += 0.5 * l2 * w[k][f] * w[k][f];
        out.gradient[k][f] += l2 * w[k][f];
      }
    }
  }
  return out;
}

// Full-batch gradient descent on standardized features.
inline LogRegModel train_logreg(std::span<const FeatureVector> raw, std::span<const Label> y,
                                const LogRegParams& params = {}) {
  if (raw.size() != y.size()) throw ValidationError("feature and label counts differ");
  std::set<Label> classes(y.begin(), y.end());
  if (classes.size() < 2) throw PipelineError("logistic regression needs at least two gold classes");
  LogRegModel model;
  model.params = params;
  const double n = static_cast<double>(raw.size());
  for (std::size_t f = 0; f + 1 < kFeatureCount; ++f) {
    double sum = 0.0;
    for (const auto& x : raw) sum += x[f];
    const double mean = sum / n;
    double var = 0.0;
    for (const auto& x : raw) var += (x[f] - mean) * (x[f] - mean);
    const double sd = std::sqrt(var / n);
    model.mean[f] = mean;
    model.scale[f] = sd > 0.0 ? sd : 1.0;
  }
  std::vector<FeatureVector> z;
  z.reserve(raw.size());
  for (const auto& x : raw) z.push_back(model.standardize(x));

  auto lg = loss_and_gradient(model.weights, z, y, params.l2);
  for (model.iterations = 0; model.iterations < params.max_iterations; ++model.iterations) {
    double gmax = 0.0;
    for (const auto& row : lg.gradient) {
      for (double g : row) gmax = std::max(gmax, std::abs(g));
    }
    if (gmax < params.tolerance) {
      model.converged = true;
      break;
    }
    for (std::size_t k = 0; k < kLabelCount; ++k) {
      for (std::size_t f = 0; f < kFeatureCount; ++f) {
        model.weights[k][f] -= params.learning_rate * lg.gradient[k][f];
      }
    }
    lg = loss_and_gradient(model.weights, z, y, params.l2);
  }
  model.final_loss = lg.loss;
  return model;
}

inline LogRegModel train_logreg(std::span<const DatasetItem> dev, const LogRegParams& params = {}) {
  std::vector<FeatureVector> x;
  std::vector<Label> y;
  for (const auto& item : dev) {
    if (!item.gold) continue;
    x.push_back(features(item));
    y.push_back(*item.gold);
  }
  return train_logreg(x, y, params);
}

inline std::array<double, kLabelCount> predict_proba(const LogRegModel& m, const FeatureVector& raw) {
  return softmax(m.weights, m.standardize(raw));
}

inline Label predict_logreg(const LogRegModel& m, const FeatureVector& raw) {
  return argmax_label(predict_proba(m, raw));
}

inline Label predict_logreg(const LogRegModel& m, const DatasetItem& item) {
  return predict_logreg(m, features(item));
}

inline nlohmann::ordered_json to_json(const LogRegModel& m) {
  nlohmann::ordered_json j;
  j["features"] = {"ld", "jac2", "jac3", "bias"};
  j["classes"] = {"yes", "inflected", "no"};
  j["weights"] = m.weights;
  j["standardization"] = {{"mean", m.mean}, {"scale", m.scale}};
  j["hyperparameters"] = {{"learning_rate", m.params.learning_rate},
                          {"max_iterations", m.params.max_iterations},
                          {"l2", m.params.l2},
                          {"tolerance", m.params.tolerance}};
  j["training"] = {{"iterations", m.iterations},
                   {"final_loss", m.final_loss},
                   {"converged", m.converged}};
  return j;
}

inline LogRegModel logreg_from_json(const nlohmann::json& j) {
  try {
    LogRegModel m;
    m.weights = j.at("weights").get<Weights>();
    m.mean = j.at("standardization").at("mean").get<decltype(m.mean)>();
    m.scale = j.at("standardization").at("scale").get<decltype(m.scale)>();
    const auto& h = j.at("hyperparameters");
    m.params.learning_rate = h.at("learning_rate").get<double>();
    m.params.max_iterations = h.at("max_iterations").get<std::size_t>();
    m.params.l2 = h.at("l2").get<double>();
    m.params.tolerance = h.value("tolerance", m.params.tolerance);
    const auto& t = j.at("training");
    m.iterations = t.at("iterations").get<std::size_t>();
    m.final_loss = t.at("final_loss").get<double>();
    m.converged = t.at("converged").get<bool>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("logistic regression model: ") + e.what());
  }
}

enum class BaselineKind { kRandom, kLdThreshold, kMajority, kLogReg };

inline std::optional<BaselineKind> parse_baseline(std::string_view s) {
  if (s == "random") return BaselineKind::kRandom;
  if (s == "ld" || s == "ld-threshold") return BaselineKind::kLdThreshold;
  if (s == "majority") return BaselineKind::kMajority;
  if (s == "logreg") return BaselineKind::kLogReg;
  return std::nullopt;
}

constexpr std::string_view to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::kRandom: return "random";
    case BaselineKind::kLdThreshold: return "ld-threshold";
    case BaselineKind::kMajority: return "majority";
    case BaselineKind::kLogReg: return "logreg";
  }
  return "?";
}

// Predictions in item order. The random system draws from one stream per seed.
inline std::vector<Label> run_baseline(BaselineKind kind, std::span<const DatasetItem> items,
                                       std::uint64_t seed, const LogRegModel* model = nullptr) {
  std::vector<Label> out;
  out.reserve(items.size());
  auto rng = derived_rng(seed, "random-baseline");
  for (const auto& item : items) {
    switch (kind) {
      case BaselineKind::kRandom: out.push_back(predict_random(rng)); break;
      case BaselineKind::kLdThreshold: out.push_back(predict_ld_threshold(item)); break;
      case BaselineKind::kMajority: out.push_back(predict_majority(item)); break;
      case BaselineKind::kLogReg:
        if (!model) throw ValidationError("logreg baseline needs a trained model");
        out.push_back(predict_logreg(*model, item));
        break;
    }
  }
  return out;
}

}  // namespace dialex
