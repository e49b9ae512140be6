#include "sersem/evaluation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "sersem/error.hpp"
#include "sersem/rng.hpp"

namespace sersem {
namespace {

struct ClassCounts {
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

ClassCounts check_binary(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("scores and labels differ in length");
  ClassCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) ++c.positives;
    else if (labels[i] == 0) ++c.negatives;
    else throw InvalidArgument("labels must be 0 or 1");
    if (!std::isfinite(scores[i])) throw InvalidArgument("non-finite score");
  }
  if (c.positives == 0 || c.negatives == 0) throw InvalidArgument("AUC needs both classes");
  return c;
}

std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return nlohmann::json(v).dump();
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

double auc_roc(std::span<const double> scores, std::span<const int> labels) {
  const ClassCounts c = check_binary(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Ranks are 1-based; a tie group spanning ranks [i+1, j] gets their mean.
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) positive_rank_sum += rank;
    }
    i = j;
  }
  const double np = static_cast<double>(c.positives);
  const double nn = static_cast<double>(c.negatives);
  return (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
  const ClassCounts c = check_binary(scores, labels);
  const std::vector<std::size_t> order = descending_order(scores);
  std::vector<RocPoint> curve{{0.0, 0.0, std::numeric_limits<double>::infinity()}};
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double threshold = scores[order[i]];
    while (i < order.size() && scores[order[i]] == threshold) {
      (labels[order[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    curve.push_back({static_cast<double>(fp) / static_cast<double>(c.negatives),
                     static_cast<double>(tp) / static_cast<double>(c.positives), threshold});
  }
  return curve;
}

double roc_area(std::span<const RocPoint> curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) / 2.0;
  }
  return area;
}

void write_roc_csv(std::span<const RocPoint> curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "fpr,tpr,threshold\n";
  for (const RocPoint& p : curve) {
    out << format_double(p.fpr) << ',' << format_double(p.tpr) << ',' << format_double(p.threshold)
        << '\n';
  }
}

SplitPlan make_splits(std::span<const SourceSample> samples, std::uint64_t seed,
                      std::size_t per_language_n, double train_fraction) {
  if (per_language_n == 0 || per_language_n % 2 != 0) {
    throw InvalidArgument("per-language sample count must be a positive even number");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgument("train fraction must lie in (0, 1)");
  }
  std::map<Language, std::array<std::vector<std::string>, 2>> pools;
  std::map<Language, bool> present;
  for (const SourceSample& s : samples) {
    present[s.language] = true;
    if (s.label) pools[s.language][static_cast<std::size_t>(*s.label)].push_back(s.id);
  }

  SplitPlan plan;
  plan.seed = seed;
  const std::size_t per_class = per_language_n / 2;
  const auto train_per_class =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(per_class)));
  for (const auto& [language, _] : present) {
    auto& classes = pools[language];
    for (int label : {1, 0}) {
      const std::size_t have = classes[static_cast<std::size_t>(label)].size();
      if (have < per_class) {
        throw InvalidArgument(std::string(to_string(language)) + ": need " +
                              std::to_string(per_class) + (label ? " members" : " non-members") +
                              ", have " + std::to_string(have) + " (short by " +
                              std::to_string(per_class - have) + ")");
      }
    }
    LanguageSplit& split = plan.languages[language];
    for (int label : {1, 0}) {
      std::vector<std::string> ids = classes[static_cast<std::size_t>(label)];
      std::sort(ids.begin(), ids.end());
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(language) * 2 + label));
      rng.shuffle(std::span(ids));
      split.train.insert(split.train.end(), ids.begin(), ids.begin() + train_per_class);
      split.inference.insert(split.inference.end(), ids.begin() + train_per_class,
                             ids.begin() + per_class);
    }
  }
  return plan;
}

nlohmann::json to_json(const SplitPlan& plan) {
  nlohmann::json j;
  j["seed"] = plan.seed;
  j["languages"] = nlohmann::json::object();
  for (const auto& [language, split] : plan.languages) {
    j["languages"][std::string(to_string(language))] = {{"train", split.train},
                                                        {"inference", split.inference}};
  }
  return j;
}

SplitPlan split_plan_from_json(const nlohmann::json& j) {
  SplitPlan plan;
  plan.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& [name, split] : j.at("languages").items()) {
    const auto language = parse_language(name);
    if (!language) throw InvalidArgument("unknown language in split plan: " + name);
    plan.languages[*language] = {split.at("train").get<std::vector<std::string>>(),
                                 split.at("inference").get<std::vector<std::string>>()};
  }
  return plan;
}

EvalReport evaluate(std::span<const MembershipScore> scores) {
  using Getter = std::optional<double> MembershipScore::*;
  const std::pair<const char*, Getter> methods[] = {
      {"anomaly", &MembershipScore::anomaly}, {"probe", &MembershipScore::probe},
      {"fused", &MembershipScore::fused},     {"loss", &MembershipScore::loss},
      {"mink", &MembershipScore::mink}};

  EvalReport report;
  for (const auto& [name, field] : methods) {
    std::vector<double> all_scores;
    std::vector<int> all_labels;
    std::map<Language, std::pair<std::vector<double>, std::vector<int>>> by_language;
    for (const MembershipScore& s : scores) {
      if (!s.label || !(s.*field)) continue;
      all_scores.push_back(*(s.*field));
      all_labels.push_back(*s.label);
      if (s.language) {
        by_language[*s.language].first.push_back(*(s.*field));
        by_language[*s.language].second.push_back(*s.label);
      }
    }
    if (all_scores.empty()) continue;

    MethodReport m;
    const auto count = [](std::span<const int> labels) {
      CellCounts c;
      for (int y : labels) (y == 1 ? c.members : c.non_members) += 1;
      return c;
    };
    m.overall_counts = count(all_labels);
    if (m.overall_counts.members > 0 && m.overall_counts.non_members > 0) {
      m.overall_pooled = auc_roc(all_scores, all_labels);
      m.roc = roc_curve(all_scores, all_labels);
    }
    double macro_sum = 0.0;
    std::size_t macro_n = 0;
    for (const auto& [language, cell] : by_language) {
      const CellCounts c = count(cell.second);
      m.counts[language] = c;
      if (c.members > 0 && c.non_members > 0) {
        const double auc = auc_roc(cell.first, cell.second);
        m.per_language[language] = auc;
        macro_sum += auc;
        ++macro_n;
      } else {
        m.per_language[language] = std::nullopt;
      }
    }
    if (macro_n > 0) m.overall_macro = macro_sum / static_cast<double>(macro_n);
    report.methods[name] = std::move(m);
  }
  return report;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json methods = nlohmann::json::object();
  for (const char* name : kScoreMethods) {
    const auto it = report.methods.find(name);
    if (it == report.methods.end()) continue;
    const MethodReport& m = it->second;
    nlohmann::json per_language = nlohmann::json::object();
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& [language, auc] : m.per_language) {
      per_language[std::string(to_string(language))] = optional_json(auc);
      const CellCounts& c = m.counts.at(language);
      counts[std::string(to_string(language))] = {{"members", c.members},
                                                  {"non_members", c.non_members}};
    }
    counts["overall"] = {{"members", m.overall_counts.members},
                         {"non_members", m.overall_counts.non_members}};
    methods[name] = {{"overall_pooled", optional_json(m.overall_pooled)},
                     {"overall_macro", optional_json(m.overall_macro)},
                     {"per_language", per_language},
                     {"counts", counts}};
  }
  return {{"methods", methods}};
}

}  // namespace sersem
