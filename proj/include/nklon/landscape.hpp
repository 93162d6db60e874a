#ifndef NKLON_LANDSCAPE_HPP
#define NKLON_LANDSCAPE_HPP

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace nklon {

// A configuration: bit i holds the allele of gene i. Valid range [0, 2^n).
using Genotype = std::uint32_t;

// Hard enumeration ceiling; every exhaustive routine refuses larger n.
inline constexpr std::uint32_t kMaxEnumerableN = 20;

// Component values for the real-valued models are integers in
// [0, 2^30); reported component = entry / 2^30. Integer fitness keeps
// the equal-fitness predicate exact, which neutrality detection needs.
inline constexpr std::int64_t kValueScale = std::int64_t{1} << 30;

// NKp zero-probability is carried in parts per billion so the instance
// document stays integer-only and round-trips exactly.
inline constexpr std::int64_t kPpbScale = 1'000'000'000;

enum class Variant { Standard, Probabilistic, Quantized };
enum class Neighborhood { Adjacent, Random };

std::string_view variant_name(Variant v);           // "nk" | "nkp" | "nkq"
std::string_view neighborhood_name(Neighborhood m); // "adjacent" | "random"

struct ModelSpec {
  Variant variant = Variant::Standard;
  double p = 0.0;        // Probabilistic: zero probability in [0,1]
  std::uint32_t q = 0;   // Quantized: levels, >= 2
  std::uint32_t n = 0;   // genes, 1..kMaxEnumerableN
  std::uint32_t k = 0;   // epistatic partners per gene, 0..n-1
  Neighborhood neighborhood = Neighborhood::Random;
  std::uint64_t seed = 0;

  void validate() const;  // throws ParameterError

  // Integer neutrality parameter as stored in documents:
  // q for Quantized, round(p * 1e9) for Probabilistic, 0 for Standard.
  std::int64_t param() const;
};

// Exact integer fitness: reported value = numerator / (n * scale).
// Comparing numerators IS the neutrality predicate.
struct FitnessValue {
  std::int64_t numerator = 0;
  friend auto operator<=>(const FitnessValue&, const FitnessValue&) = default;
};

struct NkInstance {
  ModelSpec spec;
  std::vector<std::vector<std::uint32_t>> links;  // per gene: k partner indices
  std::vector<std::vector<std::int32_t>> tables;  // per gene: 2^(k+1) entries in [0, scale)
  std::int64_t scale = 0;                         // component denominator D

  std::uint32_t n() const { return spec.n; }
  std::uint64_t space_size() const { return std::uint64_t{1} << spec.n; }

  FitnessValue fitness(Genotype g) const;
  double to_real(FitnessValue f) const {
    return static_cast<double>(f.numerator) /
           (static_cast<double>(spec.n) * static_cast<double>(scale));
  }

  // Fitness numerators for every genotype, indexed by genotype.
  std::vector<std::int64_t> all_fitness() const;

  // Table index for gene i under genotype g: own allele in bit 0,
  // partner links[i][j] in bit j+1.
  std::size_t table_index(std::uint32_t gene, Genotype g) const;
};

// Deterministic function of the spec: same spec (seed included) gives a
// bit-identical instance. Standard is generated as Probabilistic with
// p = 0 on the same draw sequence, so the two coincide exactly.
NkInstance generate_instance(const ModelSpec& spec);

// The n genotypes at Hamming distance 1, ascending by flipped bit.
std::vector<Genotype> neighbors(Genotype g, std::uint32_t n);

// Instance document: single JSON object, canonical key order
// {model, n, k, param, neighborhood, seed, scale, links, tables},
// integers only. serialize is byte-stable; deserialize validates every
// field and reports the offending path.
std::string serialize_instance(const NkInstance& inst);
NkInstance deserialize_instance(std::string_view doc);

}  // namespace nklon

#endif
