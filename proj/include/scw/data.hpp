#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <openssl/evp.h>
#include <zlib.h>

#include "scw/core.hpp"
#include "scw/rng.hpp"

namespace scw {

/// An ordered stream of examples plus the declared dimensionality.
struct Dataset {
  std::vector<Example> examples;
  Eigen::Index dim = 1;
  std::string name;

  std::size_t size() const { return examples.size(); }
};

/// How raw numeric labels collapse to {-1, +1}.
///
/// Auto requires exactly two distinct raw labels and maps them in ascending
/// order to {-1, +1}. OneVsAll maps the target to +1 and the rest to -1.
/// Pair keeps only the two named classes (a -> +1, b -> -1).
struct LabelMapping {
  enum class Kind { Auto, OneVsAll, Pair } kind = Kind::Auto;
  double target = 0.0;  // OneVsAll
  double a = 0.0, b = 0.0;  // Pair

  static LabelMapping auto_binary() { return {}; }
  static LabelMapping one_vs_all(double target) {
    return {Kind::OneVsAll, target, 0.0, 0.0};
  }
  static LabelMapping pair(double a, double b) { return {Kind::Pair, 0.0, a, b}; }
};

namespace detail {

inline bool parse_double(const std::string& tok, double& out) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + tok.size() && !tok.empty() && std::isfinite(out);
}

struct RawExample {
  std::vector<Feature> features;
  double label = 0.0;
};

}  // namespace detail

/// Applies a label mapping to raw-labeled rows. Pair mode may drop rows.
inline std::vector<Example> normalize_labels(const std::vector<detail::RawExample>& raw,
                                             const LabelMapping& mapping) {
  std::vector<Example> out;
  out.reserve(raw.size());
  switch (mapping.kind) {
    case LabelMapping::Kind::Auto: {
      std::vector<double> distinct;
      for (const auto& r : raw) {
        if (std::find(distinct.begin(), distinct.end(), r.label) == distinct.end()) {
          distinct.push_back(r.label);
          if (distinct.size() > 2) break;
        }
      }
      if (distinct.size() != 2) {
        throw ConfigError("auto label mapping needs exactly 2 distinct labels, found " +
                          std::to_string(distinct.size()));
      }
      std::sort(distinct.begin(), distinct.end());
      for (const auto& r : raw) {
        out.push_back(Example::make(r.features, r.label == distinct[0] ? -1 : +1));
      }
      break;
    }
    case LabelMapping::Kind::OneVsAll:
      for (const auto& r : raw) {
        out.push_back(Example::make(r.features, r.label == mapping.target ? +1 : -1));
      }
      break;
    case LabelMapping::Kind::Pair: {
      bool saw_a = false, saw_b = false;
      for (const auto& r : raw) {
        if (r.label == mapping.a) {
          out.push_back(Example::make(r.features, +1));
          saw_a = true;
        } else if (r.label == mapping.b) {
          out.push_back(Example::make(r.features, -1));
          saw_b = true;
        }
      }
      if (!saw_a || !saw_b) {
        throw ConfigError("pair label mapping: one of the requested classes is absent");
      }
      break;
    }
  }
  return out;
}

/// Parses LIBSVM text: `<label> <idx>:<val> ...` per line, 1-based strictly
/// ascending indices. Indices are stored 0-based; labels go through
/// `mapping`; dim becomes max index + 1.
inline Dataset parse_libsvm(std::istream& in,
                            const LabelMapping& mapping = LabelMapping::auto_binary(),
                            const std::string& name = "") {
  std::vector<detail::RawExample> raw;
  std::uint32_t max_index = 0;  // 0-based bound
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank line
    detail::RawExample ex;
    if (!detail::parse_double(tok, ex.label)) {
      throw ParseError("line " + std::to_string(lineno) + ": bad label '" + tok + "'");
    }
    std::int64_t prev_index = 0;  // 1-based
    while (ls >> tok) {
      const std::size_t colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 >= tok.size()) {
        throw ParseError("line " + std::to_string(lineno) + ": bad feature token '" +
                         tok + "'");
      }
      double idx_val = 0.0, value = 0.0;
      if (!detail::parse_double(tok.substr(0, colon), idx_val) ||
          idx_val != std::floor(idx_val) || idx_val < 1.0 || idx_val > 4294967295.0) {
        throw ParseError("line " + std::to_string(lineno) + ": bad feature index in '" +
                         tok + "'");
      }
      if (!detail::parse_double(tok.substr(colon + 1), value)) {
        throw ParseError("line " + std::to_string(lineno) + ": bad feature value in '" +
                         tok + "'");
      }
      const auto index = static_cast<std::int64_t>(idx_val);
      if (index <= prev_index) {
        throw ParseError("line " + std::to_string(lineno) +
                         ": feature indices must be ascending without duplicates");
      }
      prev_index = index;
      ex.features.push_back({static_cast<std::uint32_t>(index - 1), value});
    }
    if (!ex.features.empty()) max_index = std::max(max_index, ex.features.back().index);
    raw.push_back(std::move(ex));
  }
  if (raw.empty()) throw ParseError("empty dataset");

  Dataset ds;
  ds.examples = normalize_labels(raw, mapping);
  ds.dim = static_cast<Eigen::Index>(max_index) + 1;
  ds.name = name;
  return ds;
}

/// Inverse of parse_libsvm: 1-based indices, values at 17 significant digits.
inline void serialize_libsvm(const Dataset& ds, std::ostream& out) {
  char buf[64];
  for (const Example& ex : ds.examples) {
    out << (ex.label > 0 ? "+1" : "-1");
    for (const Feature& f : ex.features) {
      std::snprintf(buf, sizeof(buf), " %u:%.17g", f.index + 1, f.value);
      out << buf;
    }
    out << '\n';
  }
}

namespace detail {

inline std::string read_gzip_file(const std::string& path) {
  gzFile gz = gzopen(path.c_str(), "rb");
  if (!gz) throw ConfigError("cannot open '" + path + "'");
  std::string content;
  char buf[1 << 16];
  int n;
  while ((n = gzread(gz, buf, sizeof(buf))) > 0) content.append(buf, n);
  const bool bad = n < 0;
  gzclose(gz);
  if (bad) throw ConfigError("gzip read error in '" + path + "'");
  return content;
}

inline std::string stem_of(const std::string& path) {
  const std::size_t slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  for (const char* suffix : {".gz", ".libsvm", ".txt"}) {
    if (base.size() > std::strlen(suffix) &&
        base.compare(base.size() - std::strlen(suffix), std::string::npos, suffix) == 0) {
      base.resize(base.size() - std::strlen(suffix));
    }
  }
  return base;
}

}  // namespace detail

/// Loads a LIBSVM file; `.gz` inputs are inflated transparently.
inline Dataset load_libsvm_file(const std::string& path,
                                const LabelMapping& mapping = LabelMapping::auto_binary()) {
  if (path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0) {
    std::istringstream in(detail::read_gzip_file(path));
    return parse_libsvm(in, mapping, detail::stem_of(path));
  }
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return parse_libsvm(in, mapping, detail::stem_of(path));
}

/// Spec of the anisotropic synthetic stream.
struct SyntheticSpec {
  std::size_t n = 5000;
  Eigen::Index d = 20;
  double noise_rate = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (n < 1) throw ConfigError("synthetic: n must be >= 1");
    if (d < 2) throw ConfigError("synthetic: d must be >= 2");
    if (!(noise_rate >= 0.0 && noise_rate < 0.5)) {
      throw ConfigError("synthetic: noise_rate must lie in [0, 0.5)");
    }
  }
};

/// Separable-by-construction stream with per-coordinate scales log-spaced
/// over [0.1, 10], labeled by a hidden unit vector, then flipped with
/// probability noise_rate. Deterministic in the seed.
inline Dataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  std::vector<double> sigma(spec.d);
  for (Eigen::Index i = 0; i < spec.d; ++i) {
    sigma[i] = std::pow(10.0, -1.0 + 2.0 * double(i) / double(spec.d - 1));
  }

  Eigen::VectorXd w(spec.d);
  for (Eigen::Index i = 0; i < spec.d; ++i) w[i] = rng.gaussian();
  w.normalize();

  Dataset ds;
  ds.dim = spec.d;
  ds.examples.reserve(spec.n);
  const double margin = 0.01;
  for (std::size_t k = 0; k < spec.n; ++k) {
    std::vector<Feature> feats(spec.d);
    double score;
    do {
      score = 0.0;
      for (Eigen::Index i = 0; i < spec.d; ++i) {
        feats[i] = {static_cast<std::uint32_t>(i), sigma[i] * rng.gaussian()};
        score += w[i] * feats[i].value;
      }
    } while (std::fabs(score) < margin);
    ds.examples.push_back(Example::make(std::move(feats), score > 0.0 ? +1 : -1));
  }
  for (Example& ex : ds.examples) {
    if (rng.uniform() < spec.noise_rate) ex.label = -ex.label;
  }
  char name[96];
  std::snprintf(name, sizeof(name), "synthetic(n=%zu,d=%td,noise=%g,seed=%llu)", spec.n,
                static_cast<std::ptrdiff_t>(spec.d), spec.noise_rate,
                static_cast<unsigned long long>(spec.seed));
  ds.name = name;
  return ds;
}

/// Seeded Fisher-Yates permutation of the stream order.
inline Dataset permute(const Dataset& ds, std::uint64_t seed) {
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  Dataset out;
  out.dim = ds.dim;
  out.name = ds.name;
  out.examples.reserve(ds.size());
  for (std::size_t i : order) out.examples.push_back(ds.examples[i]);
  return out;
}

// --- dataset manifest -------------------------------------------------------

struct ManifestEntry {
  std::string name;
  std::string file;
  std::string url;
  std::string sha256;
  std::string note;
};

/// INI-style manifest: one [section] per dataset with file/url/sha256 keys.
inline std::vector<ManifestEntry> parse_manifest(std::istream& in) {
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    if (line[first] == '[') {
      const auto close = line.find(']', first);
      if (close == std::string::npos) {
        throw ParseError("manifest line " + std::to_string(lineno) + ": unclosed '['");
      }
      entries.push_back({line.substr(first + 1, close - first - 1), "", "", "", ""});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos || entries.empty()) {
      throw ParseError("manifest line " + std::to_string(lineno) + ": expected key = value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    ManifestEntry& entry = entries.back();
    if (key == "file") entry.file = value;
    else if (key == "url") entry.url = value;
    else if (key == "sha256") entry.sha256 = value;
    else if (key == "note") entry.note = value;
    else throw ParseError("manifest line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  return entries;
}

inline std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest '" + path + "'");
  return parse_manifest(in);
}

/// Streaming SHA-256 of a file, lowercase hex.
inline std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw NumericError("sha256: digest init failed");
  }
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    if (!in) break;
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

struct VerifyResult {
  std::string name;
  enum class Status { Ok, Missing, Mismatch } status;
  std::string detail;
};

/// Checks every manifest entry's file under `dir` against its sha256.
inline std::vector<VerifyResult> verify_manifest(const std::vector<ManifestEntry>& entries,
                                                 const std::string& dir) {
  std::vector<VerifyResult> results;
  for (const ManifestEntry& e : entries) {
    const std::string path = dir.empty() ? e.file : dir + "/" + e.file;
    std::ifstream probe(path, std::ios::binary);
    if (!probe) {
      results.push_back({e.name, VerifyResult::Status::Missing, path + " (see " + e.url + ")"});
      continue;
    }
    probe.close();
    const std::string digest = sha256_file(path);
    if (digest == e.sha256) {
      results.push_back({e.name, VerifyResult::Status::Ok, path});
    } else {
      results.push_back({e.name, VerifyResult::Status::Mismatch,
                         path + " sha256 " + digest + " != " + e.sha256});
    }
  }
  return results;
}

}  // namespace scw
