#include "nklon/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "nklon/errors.hpp"
#include "nklon/rng.hpp"

namespace nklon {

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::Standard: return "nk";
    case Variant::Probabilistic: return "nkp";
    case Variant::Quantized: return "nkq";
  }
  return "?";
}

std::string_view neighborhood_name(Neighborhood m) {
  return m == Neighborhood::Adjacent ? "adjacent" : "random";
}

void ModelSpec::validate() const {
  if (n < 1 || n > kMaxEnumerableN)
    throw ParameterError("n must be in [1, " + std::to_string(kMaxEnumerableN) +
                         "], got " + std::to_string(n));
  if (k >= n)
    throw ParameterError("k must satisfy 0 <= k <= n-1, got k=" +
                         std::to_string(k) + " with n=" + std::to_string(n));
  if (variant == Variant::Probabilistic && !(p >= 0.0 && p <= 1.0))
    throw ParameterError("p must lie in [0,1], got " + std::to_string(p));
  if (variant == Variant::Quantized && q < 2)
    throw ParameterError("q must be an integer >= 2, got " + std::to_string(q));
}

std::int64_t ModelSpec::param() const {
  switch (variant) {
    case Variant::Standard: return 0;
    case Variant::Probabilistic: return std::llround(p * static_cast<double>(kPpbScale));
    case Variant::Quantized: return q;
  }
  return 0;
}

namespace {

// Substream layout: gene i draws its links from stream 2i and its table
// from stream 2i+1.
std::vector<std::uint32_t> make_links(const ModelSpec& spec, std::uint32_t gene) {
  std::vector<std::uint32_t> out;
  out.reserve(spec.k);
  if (spec.k == 0) return out;
  if (spec.neighborhood == Neighborhood::Adjacent) {
    // ceil(k/2) partners to the left, floor(k/2) to the right, periodic:
    // stored as offsets -L..-1, +1..+R from the gene.
    std::uint32_t left = (spec.k + 1) / 2;
    std::uint32_t right = spec.k / 2;
    for (std::uint32_t d = left; d >= 1; --d)
      out.push_back((gene + spec.n - d) % spec.n);
    for (std::uint32_t d = 1; d <= right; ++d)
      out.push_back((gene + d) % spec.n);
  } else {
    // Partial Fisher-Yates over {0..n-1}\{gene}.
    SplitMix64 rng = substream(spec.seed, 2ULL * gene);
    std::vector<std::uint32_t> pool;
    pool.reserve(spec.n - 1);
    for (std::uint32_t j = 0; j < spec.n; ++j)
      if (j != gene) pool.push_back(j);
    for (std::uint32_t j = 0; j < spec.k; ++j) {
      std::uint64_t pick = j + rng.bounded(pool.size() - j);
      std::swap(pool[j], pool[pick]);
      out.push_back(pool[j]);
    }
  }
  return out;
}

std::vector<std::int32_t> make_table(const ModelSpec& spec, std::uint32_t gene) {
  const std::size_t entries = std::size_t{1} << (spec.k + 1);
  std::vector<std::int32_t> table(entries);
  SplitMix64 rng = substream(spec.seed, 2ULL * gene + 1);
  if (spec.variant == Variant::Quantized) {
    for (auto& e : table) e = static_cast<std::int32_t>(rng.bounded(spec.q));
  } else {
    // Standard runs the Probabilistic path with p9 = 0. The zero draw
    // comes first and the value draw always happens, so the stream
    // consumption is independent of p.
    const std::uint64_t p9 =
        spec.variant == Variant::Probabilistic
            ? static_cast<std::uint64_t>(spec.param())
            : 0;
    for (auto& e : table) {
      bool zero = rng.bounded(kPpbScale) < p9;
      std::int32_t value = static_cast<std::int32_t>(rng.next() >> 34);
      e = zero ? 0 : value;
    }
  }
  return table;
}

}  // namespace

NkInstance generate_instance(const ModelSpec& spec) {
  spec.validate();
  NkInstance inst;
  inst.spec = spec;
  inst.scale = spec.variant == Variant::Quantized ? spec.q : kValueScale;
  inst.links.reserve(spec.n);
  inst.tables.reserve(spec.n);
  for (std::uint32_t i = 0; i < spec.n; ++i) {
    inst.links.push_back(make_links(spec, i));
    inst.tables.push_back(make_table(spec, i));
  }
  return inst;
}

std::size_t NkInstance::table_index(std::uint32_t gene, Genotype g) const {
  std::size_t idx = (g >> gene) & 1u;
  const auto& ln = links[gene];
  for (std::size_t j = 0; j < ln.size(); ++j)
    idx |= static_cast<std::size_t>((g >> ln[j]) & 1u) << (j + 1);
  return idx;
}

FitnessValue NkInstance::fitness(Genotype g) const {
  std::int64_t sum = 0;
  for (std::uint32_t i = 0; i < spec.n; ++i)
    sum += tables[i][table_index(i, g)];
  return FitnessValue{sum};
}

std::vector<std::int64_t> NkInstance::all_fitness() const {
  const std::uint64_t size = space_size();
  std::vector<std::int64_t> fit(size);
  for (std::uint64_t g = 0; g < size; ++g)
    fit[g] = fitness(static_cast<Genotype>(g)).numerator;
  return fit;
}

std::vector<Genotype> neighbors(Genotype g, std::uint32_t n) {
  std::vector<Genotype> out;
  out.reserve(n);
  for (std::uint32_t b = 0; b < n; ++b) out.push_back(g ^ (Genotype{1} << b));
  return out;
}

std::string serialize_instance(const NkInstance& inst) {
  nlohmann::ordered_json doc;
  doc["model"] = variant_name(inst.spec.variant);
  doc["n"] = inst.spec.n;
  doc["k"] = inst.spec.k;
  doc["param"] = inst.spec.param();
  doc["neighborhood"] = neighborhood_name(inst.spec.neighborhood);
  doc["seed"] = inst.spec.seed;
  doc["scale"] = inst.scale;
  doc["links"] = inst.links;
  doc["tables"] = inst.tables;
  return doc.dump();
}

namespace {

const nlohmann::json& field(const nlohmann::json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) throw ParseError(std::string("missing field: ") + key);
  return *it;
}

template <typename T>
T int_field(const nlohmann::json& doc, const char* key) {
  const auto& v = field(doc, key);
  if (!v.is_number_integer() && !v.is_number_unsigned())
    throw ParseError(std::string(key) + ": expected integer");
  return v.get<T>();
}

std::string str_field(const nlohmann::json& doc, const char* key) {
  const auto& v = field(doc, key);
  if (!v.is_string()) throw ParseError(std::string(key) + ": expected string");
  return v.get<std::string>();
}

}  // namespace

NkInstance deserialize_instance(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("document root must be an object");

  NkInstance inst;
  const std::string model = str_field(doc, "model");
  if (model == "nk") inst.spec.variant = Variant::Standard;
  else if (model == "nkp") inst.spec.variant = Variant::Probabilistic;
  else if (model == "nkq") inst.spec.variant = Variant::Quantized;
  else throw ParseError("model: unknown value '" + model + "'");

  inst.spec.n = int_field<std::uint32_t>(doc, "n");
  inst.spec.k = int_field<std::uint32_t>(doc, "k");
  const std::int64_t param = int_field<std::int64_t>(doc, "param");
  const std::string nb = str_field(doc, "neighborhood");
  if (nb == "adjacent") inst.spec.neighborhood = Neighborhood::Adjacent;
  else if (nb == "random") inst.spec.neighborhood = Neighborhood::Random;
  else throw ParseError("neighborhood: unknown value '" + nb + "'");
  inst.spec.seed = int_field<std::uint64_t>(doc, "seed");
  inst.scale = int_field<std::int64_t>(doc, "scale");

  switch (inst.spec.variant) {
    case Variant::Standard:
      if (param != 0) throw ParseError("param: must be 0 for model nk");
      if (inst.scale != kValueScale) throw ParseError("scale: must be 2^30 for model nk");
      break;
    case Variant::Probabilistic:
      if (param < 0 || param > kPpbScale)
        throw ParseError("param: p*1e9 out of [0, 1e9]");
      inst.spec.p = static_cast<double>(param) / static_cast<double>(kPpbScale);
      if (inst.scale != kValueScale) throw ParseError("scale: must be 2^30 for model nkp");
      break;
    case Variant::Quantized:
      if (param < 2) throw ParseError("param: q must be >= 2");
      inst.spec.q = static_cast<std::uint32_t>(param);
      if (inst.scale != param) throw ParseError("scale: must equal q for model nkq");
      break;
  }
  inst.spec.validate();

  const auto& links = field(doc, "links");
  if (!links.is_array() || links.size() != inst.spec.n)
    throw ParseError("links: expected array of n entries");
  for (std::uint32_t i = 0; i < inst.spec.n; ++i) {
    const auto& row = links[i];
    const std::string path = "links[" + std::to_string(i) + "]";
    if (!row.is_array() || row.size() != inst.spec.k)
      throw ParseError(path + ": expected k partner indices");
    std::vector<std::uint32_t> ln;
    for (const auto& v : row) {
      if (!v.is_number_integer() && !v.is_number_unsigned())
        throw ParseError(path + ": expected integers");
      std::int64_t idx = v.get<std::int64_t>();
      if (idx < 0 || idx >= static_cast<std::int64_t>(inst.spec.n))
        throw ParseError(path + ": partner index out of range");
      if (idx == static_cast<std::int64_t>(i))
        throw ParseError(path + ": gene cannot be its own partner");
      ln.push_back(static_cast<std::uint32_t>(idx));
    }
    auto sorted = ln;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw ParseError(path + ": duplicate partner index");
    inst.links.push_back(std::move(ln));
  }

  const auto& tables = field(doc, "tables");
  if (!tables.is_array() || tables.size() != inst.spec.n)
    throw ParseError("tables: expected array of n entries");
  const std::size_t entries = std::size_t{1} << (inst.spec.k + 1);
  for (std::uint32_t i = 0; i < inst.spec.n; ++i) {
    const auto& row = tables[i];
    const std::string path = "tables[" + std::to_string(i) + "]";
    if (!row.is_array() || row.size() != entries)
      throw ParseError(path + ": expected 2^(k+1) entries");
    std::vector<std::int32_t> tb;
    tb.reserve(entries);
    for (const auto& v : row) {
      if (!v.is_number_integer() && !v.is_number_unsigned())
        throw ParseError(path + ": expected integers");
      std::int64_t e = v.get<std::int64_t>();
      if (e < 0 || e >= inst.scale)
        throw ParseError(path + ": entry " + std::to_string(e) +
                         " out of [0, scale)");
      tb.push_back(static_cast<std::int32_t>(e));
    }
    inst.tables.push_back(std::move(tb));
  }
  return inst;
}

}  // namespace nklon
