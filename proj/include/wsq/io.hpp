#pragma once

// Instance files and certificates. Complex numbers are always [re, im] pairs;
// object keys come out sorted, so state labels appear in lexicographic order.

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "wsq/minimality.hpp"
#include "wsq/petz.hpp"
#include "wsq/spectral.hpp"
#include "wsq/sufficiency.hpp"

namespace wsq {

using Json = nlohmann::json;

inline constexpr const char* tool_version = "0.1.0";

struct Instance {
  std::optional<DiscreteStatistic> statistic;
  StateFamily family;
};

/// Throws ParseError (schema, with a JSON-pointer path) or the domain error
/// raised by the violated invariant.
Instance parse_instance(const std::string& text);
Instance instance_from_json(const Json& j);
Instance load_instance(const std::filesystem::path& path);

Json instance_to_json(const Instance& inst);
std::string serialize_instance(const Instance& inst);

Json complex_to_json(Complex z);
Complex complex_from_json(const Json& j, const std::string& path);
Json vector_to_json(const CVector& v);
CVector vector_from_json(const Json& j, const std::string& path);
Json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const Json& j, std::size_t d, const std::string& path);
Json statistic_to_json(const DiscreteStatistic& t);
DiscreteStatistic statistic_from_json(const Json& j, std::size_t d, const std::string& path);

// Certificates: {kind, verdict, payload, tolerances, tool_version}.

Json weak_certificate(const DiscreteStatistic& t, const SufficiencyVerdict& verdict,
                      const SufficiencyOptions& options, const std::string& statistic_source);
Json existence_certificate(const ExistenceResult& result, const SufficiencyOptions& options);
Json minimality_certificate(const DiscreteStatistic& t, const MinimalResult& result,
                            const SufficiencyOptions& options);
Json petz_certificate(const PetzInstance& inst, const PetzCertificate& cert,
                      const PetzOptions& options);

Json witness_to_json(const WitnessFactorization& w);
WitnessFactorization witness_from_json(const Json& j, const std::string& path);

enum class Recheck { verified, rejected, heuristic };

struct RecheckResult {
  Recheck status = Recheck::rejected;
  std::string message;
};

/// Re-checks a certificate against an instance alone. Heuristic verdicts
/// (numerical Petz infeasibility) cannot be confirmed and report `heuristic`.
RecheckResult recheck_certificate(const Instance& inst, const Json& certificate);

}  // namespace wsq
