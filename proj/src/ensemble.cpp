#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>
#include <thread>

#include <nlohmann/json.hpp>

#include "sersem/error.hpp"
#include "sersem/evaluation.hpp"
#include "sersem/parallel.hpp"
#include "sersem/probe.hpp"
#include "sersem/rng.hpp"

namespace sersem {
namespace {

constexpr char kBundleMagic[8] = {'S', 'E', 'R', 'S', 'E', 'M', 'P', 'B'};
constexpr std::uint32_t kBundleVersion = 1;

void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_le(const std::string& in, std::size_t pos, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  return v;
}

nlohmann::json config_json(const TrainConfig& c) {
  return {{"hidden_dim", c.hidden_dim}, {"learning_rate", c.learning_rate},
          {"momentum", c.momentum},     {"epochs", c.epochs},
          {"batch_size", c.batch_size}, {"seed", c.seed},
          {"validation_fraction", c.validation_fraction}};
}

TrainConfig config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.momentum = j.at("momentum").get<double>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.validation_fraction = j.at("validation_fraction").get<double>();
  return c;
}

}  // namespace

LayerSelection rank_layers(std::map<std::size_t, double> auc_by_layer, std::size_t top_k) {
  LayerSelection s;
  for (const auto& [layer, auc] : auc_by_layer) s.ranked.push_back({layer, auc});
  std::stable_sort(s.ranked.begin(), s.ranked.end(), [](const LayerScore& a, const LayerScore& b) {
    return a.auc != b.auc ? a.auc > b.auc : a.layer < b.layer;
  });
  const std::size_t k = std::min(top_k, s.ranked.size());
  for (std::size_t i = 0; i < k; ++i) s.chosen.push_back(s.ranked[i].layer);
  return s;
}

LayerSelection select_layers(const ProbeSet& probes,
                             const std::map<std::size_t, LabeledSet>& validation,
                             std::size_t top_k) {
  std::map<std::size_t, double> aucs;
  for (const auto& [layer, probe] : probes) {
    const auto it = validation.find(layer);
    if (it == validation.end()) {
      throw InvalidArgument("no validation data for layer " + std::to_string(layer));
    }
    std::vector<double> scores;
    scores.reserve(it->second.size());
    for (const auto& row : it->second.features) scores.push_back(probe_logit(probe, row));
    aucs[layer] = auc_roc(scores, it->second.labels);
  }
  return rank_layers(std::move(aucs), top_k);
}

double ensemble_infer(const LayerSelection& selection, const ProbeSet& probes,
                      const std::map<std::size_t, std::vector<double>>& features) {
  if (selection.chosen.empty()) throw InvalidArgument("layer selection is empty");
  double sum = 0.0;
  for (std::size_t layer : selection.chosen) {
    const auto f = features.find(layer);
    if (f == features.end()) {
      throw InvalidArgument("missing features for layer " + std::to_string(layer));
    }
    const auto p = probes.find(layer);
    if (p == probes.end()) throw InvalidArgument("missing probe for layer " + std::to_string(layer));
    sum += probe_infer(p->second, f->second);
  }
  return sum / static_cast<double>(selection.chosen.size());
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    std::span<const int> labels, double validation_fraction, std::uint64_t seed) {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  for (int label : {0, 1}) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == label) rows.push_back(i);
    }
    Rng rng(derive_seed(seed, 0x5b17u + static_cast<std::uint64_t>(label)));
    rng.shuffle(std::span(rows));
    auto n_val = static_cast<std::size_t>(
        std::llround(validation_fraction * static_cast<double>(rows.size())));
    if (rows.size() >= 2) n_val = std::clamp<std::size_t>(n_val, 1, rows.size() - 1);
    validation.insert(validation.end(), rows.begin(), rows.begin() + n_val);
    train.insert(train.end(), rows.begin() + n_val, rows.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(validation.begin(), validation.end());
  return {train, validation};
}

ProbeBundle train_probe_bundle(const std::map<std::size_t, LabeledSet>& layers,
                               const TrainConfig& config, std::size_t workers) {
  config.validate();
  if (layers.empty()) throw InvalidArgument("no layers to train");
  const LabeledSet& first = layers.begin()->second;
  for (const auto& [layer, set] : layers) {
    if (set.ids != first.ids || set.labels != first.labels) {
      throw InvalidArgument("layer " + std::to_string(layer) +
                            " does not list the same samples as layer " +
                            std::to_string(layers.begin()->first));
    }
  }
  const auto [train_rows, val_rows] =
      stratified_split(first.labels, config.validation_fraction, config.seed);

  std::vector<std::size_t> layer_ids;
  for (const auto& [layer, _] : layers) layer_ids.push_back(layer);
  std::vector<ProbeParams> trained(layer_ids.size());
  parallel_for(layer_ids.size(), workers, [&](std::size_t i, std::size_t) {
    const LabeledSet& set = layers.at(layer_ids[i]);
    trained[i] = train_probe(set.subset(train_rows), config, layer_ids[i]);
  });

  ProbeBundle bundle;
  bundle.config = config;
  std::map<std::size_t, LabeledSet> validation;
  for (std::size_t i = 0; i < layer_ids.size(); ++i) {
    bundle.probes[layer_ids[i]] = std::move(trained[i]);
    validation[layer_ids[i]] = layers.at(layer_ids[i]).subset(val_rows);
  }
  bundle.selection = select_layers(bundle.probes, validation);
  return bundle;
}

// Layout: 8-byte magic, u32 version, u64 header length, JSON header, then
// little-endian f64 arrays at the byte offsets (relative to the payload
// start) listed in the header.
void write_bundle(const ProbeBundle& bundle, const std::filesystem::path& path) {
  std::string payload;
  const auto add_array = [&](std::span<const double> values, std::vector<std::size_t> shape) {
    nlohmann::json entry = {{"offset", payload.size()}, {"shape", shape}};
    for (double v : values) put_le(payload, std::bit_cast<std::uint64_t>(v), 8);
    return entry;
  };

  nlohmann::json layers = nlohmann::json::array();
  for (const auto& [layer, p] : bundle.probes) {
    const double b2 = p.b2;
    layers.push_back({{"layer", layer},
                      {"input_dim", p.input_dim},
                      {"hidden_dim", p.hidden_dim},
                      {"trained", p.trained},
                      {"arrays",
                       {{"mean", add_array(p.standardizer.mean, {p.input_dim})},
                        {"scale", add_array(p.standardizer.scale, {p.input_dim})},
                        {"w1", add_array(p.w1, {p.input_dim, p.hidden_dim})},
                        {"b1", add_array(p.b1, {p.hidden_dim})},
                        {"w2", add_array(p.w2, {p.hidden_dim})},
                        {"b2", add_array(std::span(&b2, 1), {})}}}});
  }
  nlohmann::json ranked = nlohmann::json::array();
  for (const LayerScore& s : bundle.selection.ranked) {
    ranked.push_back({{"layer", s.layer}, {"auc", s.auc}});
  }
  const nlohmann::json header = {
      {"format", "sersem-probe-bundle"},
      {"config", config_json(bundle.config)},
      {"selection", {{"ranked", ranked}, {"chosen", bundle.selection.chosen}}},
      {"layers", layers}};
  const std::string header_text = header.dump();

  std::string out(kBundleMagic, sizeof kBundleMagic);
  put_le(out, kBundleVersion, 4);
  put_le(out, header_text.size(), 8);
  out += header_text;
  out += payload;

  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot write probe bundle " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw Error("failed writing probe bundle " + path.string());
}

ProbeBundle read_bundle(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open probe bundle " + path.string());
  const std::string in((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  const std::string source = path.string();
  const auto fail = [&](const std::string& what) {
    return InvalidArgument("probe bundle " + source + ": " + what);
  };
  if (in.size() < 20 || std::memcmp(in.data(), kBundleMagic, sizeof kBundleMagic) != 0) {
    throw fail("bad magic");
  }
  if (get_le(in, 8, 4) != kBundleVersion) throw fail("unsupported version");
  const std::uint64_t header_len = get_le(in, 12, 8);
  if (20 + header_len > in.size()) throw fail("truncated header");
  const std::size_t payload_start = 20 + header_len;

  ProbeBundle bundle;
  try {
    const nlohmann::json header = nlohmann::json::parse(in.substr(20, header_len));
    const auto read_array = [&](const nlohmann::json& entry) {
      std::size_t count = 1;
      for (std::size_t d : entry.at("shape").get<std::vector<std::size_t>>()) count *= d;
      const std::size_t offset = payload_start + entry.at("offset").get<std::size_t>();
      if (offset + 8 * count > in.size()) throw fail("array past end of file");
      std::vector<double> values(count);
      for (std::size_t i = 0; i < count; ++i) {
        values[i] = std::bit_cast<double>(get_le(in, offset + 8 * i, 8));
      }
      return values;
    };

    bundle.config = config_from_json(header.at("config"));
    for (const auto& entry : header.at("layers")) {
      ProbeParams p;
      p.layer = entry.at("layer").get<std::size_t>();
      p.input_dim = entry.at("input_dim").get<std::size_t>();
      p.hidden_dim = entry.at("hidden_dim").get<std::size_t>();
      p.trained = entry.at("trained").get<bool>();
      const auto& arrays = entry.at("arrays");
      p.standardizer.mean = read_array(arrays.at("mean"));
      p.standardizer.scale = read_array(arrays.at("scale"));
      p.w1 = read_array(arrays.at("w1"));
      p.b1 = read_array(arrays.at("b1"));
      p.w2 = read_array(arrays.at("w2"));
      p.b2 = read_array(arrays.at("b2")).at(0);
      if (p.standardizer.mean.size() != p.input_dim || p.w1.size() != p.input_dim * p.hidden_dim ||
          p.b1.size() != p.hidden_dim || p.w2.size() != p.hidden_dim) {
        throw fail("inconsistent shapes for layer " + std::to_string(p.layer));
      }
      bundle.probes[p.layer] = std::move(p);
    }
    for (const auto& s : header.at("selection").at("ranked")) {
      bundle.selection.ranked.push_back({s.at("layer").get<std::size_t>(), s.at("auc").get<double>()});
    }
    bundle.selection.chosen = header.at("selection").at("chosen").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw fail(std::string("bad header: ") + e.what());
  }
  for (std::size_t layer : bundle.selection.chosen) {
    if (!bundle.probes.contains(layer)) throw fail("chosen layer " + std::to_string(layer) + " has no probe");
  }
  return bundle;
}

}  // namespace sersem
