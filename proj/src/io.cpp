#include "sersem/io.hpp"

#include <cmath>
#include <set>

#include "sersem/error.hpp"
#include "sersem/utf8.hpp"

namespace sersem {
namespace {

using json = nlohmann::json;

class RowReader {
 public:
  RowReader(const json& row, const std::string& source, std::size_t line)
      : row_(row), source_(source), line_(line) {
    if (!row.is_object()) fail("expected a JSON object");
  }

  [[noreturn]] void fail(const std::string& what) const { throw SchemaError(source_, line_, what); }

  const json& field(const char* key) const {
    const auto it = row_.find(key);
    if (it == row_.end()) fail(std::string("missing field \"") + key + "\"");
    return *it;
  }

  std::string string(const char* key) const {
    const json& v = field(key);
    if (!v.is_string()) fail(std::string("\"") + key + "\" must be a string");
    return v.get<std::string>();
  }

  std::size_t index(const json& v, const char* what) const {
    if (!v.is_number_unsigned()) fail(std::string(what) + " must be a non-negative integer");
    return v.get<std::size_t>();
  }

  double number(const json& v, const char* what) const {
    if (!v.is_number()) fail(std::string(what) + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(std::string(what) + " must be finite");
    return d;
  }

  std::optional<double> optional_number(const char* key) const {
    const auto it = row_.find(key);
    if (it == row_.end() || it->is_null()) return std::nullopt;
    return number(*it, key);
  }

  std::optional<int> label(const char* key) const {
    const auto it = row_.find(key);
    if (it == row_.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer() || (*it != 0 && *it != 1)) fail("label must be 0, 1 or null");
    return it->get<int>();
  }

  std::vector<double> numbers(const char* key) const {
    const json& v = field(key);
    if (!v.is_array()) fail(std::string("\"") + key + "\" must be an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const json& x : v) out.push_back(number(x, key));
    return out;
  }

 private:
  const json& row_;
  const std::string& source_;
  std::size_t line_;
};

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

void for_each_ndjson(const std::filesystem::path& path,
                     const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  const std::string source = path.string();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      throw SchemaError(source, line_no, std::string("invalid JSON: ") + e.what());
    }
    fn(row, line_no);
  }
}

std::vector<SourceSample> read_manifest(const std::filesystem::path& path) {
  const std::string source = path.string();
  std::vector<SourceSample> samples;
  std::set<std::string> seen;
  for_each_ndjson(path, [&](const json& row, std::size_t line) {
    const RowReader r(row, source, line);
    SourceSample s;
    s.id = r.string("id");
    if (s.id.empty()) r.fail("id must be non-empty");
    if (!seen.insert(s.id).second) r.fail("duplicate id \"" + s.id + "\"");
    const auto language = parse_language(r.string("language"));
    if (!language) r.fail("unsupported language for sample " + s.id);
    s.language = *language;
    s.label = r.label("label");
    s.content = r.string("content");
    if (!is_valid_utf8(s.content)) r.fail("content of sample " + s.id + " is not valid UTF-8");
    samples.push_back(std::move(s));
  });
  return samples;
}

nlohmann::ordered_json to_json(const SourceSample& sample) {
  nlohmann::ordered_json j;
  j["id"] = sample.id;
  j["language"] = std::string(to_string(sample.language));
  j["label"] = sample.label ? json(*sample.label) : json(nullptr);
  j["content"] = sample.content;
  return j;
}

nlohmann::ordered_json to_json(const CharWeightMask& mask) {
  nlohmann::ordered_json j;
  j["sample_id"] = mask.sample_id;
  j["length"] = mask.length;
  j["degraded"] = mask.degraded;
  j["spans"] = nlohmann::ordered_json::array();
  for (const WeightRun& run : mask.spans) j["spans"].push_back({run.start, run.end, run.weight});
  return j;
}

std::map<std::string, CharWeightMask> read_masks(const std::filesystem::path& path) {
  const std::string source = path.string();
  std::map<std::string, CharWeightMask> masks;
  for_each_ndjson(path, [&](const json& row, std::size_t line) {
    const RowReader r(row, source, line);
    CharWeightMask m;
    m.sample_id = r.string("sample_id");
    m.length = r.index(r.field("length"), "length");
    const json& degraded = r.field("degraded");
    if (!degraded.is_boolean()) r.fail("degraded must be a boolean");
    m.degraded = degraded.get<bool>();
    const json& spans = r.field("spans");
    if (!spans.is_array()) r.fail("spans must be an array");
    std::size_t prev_end = 0;
    for (const json& s : spans) {
      if (!s.is_array() || s.size() != 3) r.fail("each span must be [start, end, weight]");
      WeightRun run{r.index(s[0], "span start"), r.index(s[1], "span end"),
                    r.number(s[2], "span weight")};
      if (run.start >= run.end || run.end > m.length) r.fail("span outside [0, length)");
      if (run.start < prev_end) r.fail("spans must be sorted and non-overlapping");
      if (!is_mask_weight(run.weight)) r.fail("span weight is not a mask weight");
      prev_end = run.end;
      m.spans.push_back(run);
    }
    if (!masks.emplace(m.sample_id, m).second) r.fail("duplicate mask for " + m.sample_id);
  });
  return masks;
}

std::vector<TokenRecord> TokenDump::records() const {
  std::vector<TokenRecord> out;
  out.reserve(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) {
    const TokenSpan& t = tokens[k + 1];
    out.push_back({k + 1, t.start, t.end, z[k], logprob[k]});
  }
  return out;
}

nlohmann::ordered_json to_json(const TokenDump& dump) {
  nlohmann::ordered_json j;
  j["sample_id"] = dump.sample_id;
  j["tokens"] = nlohmann::ordered_json::array();
  for (const TokenSpan& t : dump.tokens) j["tokens"].push_back({t.start, t.end});
  j["z"] = dump.z;
  j["logprob"] = dump.logprob;
  return j;
}

std::map<std::string, TokenDump> read_token_records(const std::filesystem::path& path) {
  const std::string source = path.string();
  std::map<std::string, TokenDump> dumps;
  for_each_ndjson(path, [&](const json& row, std::size_t line) {
    const RowReader r(row, source, line);
    TokenDump d;
    d.sample_id = r.string("sample_id");
    const json& tokens = r.field("tokens");
    if (!tokens.is_array() || tokens.empty()) r.fail("tokens must be a non-empty array");
    std::size_t prev_start = 0;
    for (const json& t : tokens) {
      if (!t.is_array() || t.size() != 2) r.fail("each token must be [start, end]");
      TokenSpan span{d.tokens.size(), r.index(t[0], "token start"), r.index(t[1], "token end")};
      if (span.end < span.start) r.fail("token end precedes start");
      if (span.start < prev_start) r.fail("token starts must be non-decreasing");
      prev_start = span.start;
      d.tokens.push_back(span);
    }
    d.z = r.numbers("z");
    d.logprob = r.numbers("logprob");
    if (d.z.size() != d.tokens.size() - 1 || d.logprob.size() != d.tokens.size() - 1) {
      r.fail("z and logprob must have one entry per predicted position (tokens - 1)");
    }
    for (double lp : d.logprob) {
      if (lp > 0.0) r.fail("logprob must be <= 0");
    }
    if (!dumps.emplace(d.sample_id, d).second) r.fail("duplicate token record for " + d.sample_id);
  });
  return dumps;
}

FeatureTable read_features(const std::filesystem::path& path) {
  const std::string source = path.string();
  FeatureTable table;
  for_each_ndjson(path, [&](const json& row, std::size_t line) {
    const RowReader r(row, source, line);
    const std::string id = r.string("sample_id");
    const std::size_t layer = r.index(r.field("layer"), "layer");
    std::vector<double> features = r.numbers("features");
    if (features.empty()) r.fail("features must be non-empty");
    const auto [dim, inserted] = table.dims.emplace(layer, features.size());
    if (!inserted && dim->second != features.size()) {
      r.fail("layer " + std::to_string(layer) + " has dimension " + std::to_string(dim->second) +
             ", this row has " + std::to_string(features.size()));
    }
    if (!table.by_sample[id].emplace(layer, std::move(features)).second) {
      r.fail("duplicate features for " + id + " layer " + std::to_string(layer));
    }
  });
  return table;
}

nlohmann::ordered_json to_json(const MembershipScore& s) {
  nlohmann::ordered_json j;
  j["sample_id"] = s.sample_id;
  j["language"] = s.language ? json(std::string(to_string(*s.language))) : json(nullptr);
  j["label"] = s.label ? json(*s.label) : json(nullptr);
  j["anomaly"] = nullable(s.anomaly);
  j["probe"] = nullable(s.probe);
  j["fused"] = nullable(s.fused);
  j["loss"] = nullable(s.loss);
  j["mink"] = nullable(s.mink);
  return j;
}

std::vector<MembershipScore> read_scores(const std::filesystem::path& path) {
  const std::string source = path.string();
  std::vector<MembershipScore> scores;
  std::set<std::string> seen;
  for_each_ndjson(path, [&](const json& row, std::size_t line) {
    const RowReader r(row, source, line);
    MembershipScore s;
    s.sample_id = r.string("sample_id");
    if (!seen.insert(s.sample_id).second) r.fail("duplicate score row for " + s.sample_id);
    if (const auto it = row.find("language"); it != row.end() && !it->is_null()) {
      if (!it->is_string()) r.fail("language must be a string");
      s.language = parse_language(it->get<std::string>());
      if (!s.language) r.fail("unsupported language");
    }
    s.label = r.label("label");
    s.anomaly = r.optional_number("anomaly");
    s.probe = r.optional_number("probe");
    s.fused = r.optional_number("fused");
    s.loss = r.optional_number("loss");
    s.mink = r.optional_number("mink");
    scores.push_back(std::move(s));
  });
  return scores;
}

NdjsonWriter::NdjsonWriter(const std::filesystem::path& path)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw Error("cannot write " + path.string());
}

void NdjsonWriter::write(const nlohmann::ordered_json& row) { write_line(row.dump()); }

void NdjsonWriter::write_line(const std::string& line) {
  out_ << line << '\n';
  if (!out_) throw Error("failed writing " + path_.string());
}

void NdjsonWriter::close() {
  out_.flush();
  if (!out_) throw Error("failed writing " + path_.string());
  out_.close();
}

}  // namespace sersem
