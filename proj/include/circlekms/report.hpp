#pragma once

// JSON and CSV serialization. Output is canonical: object keys sorted,
// rationals as {"num": "...", "den": "..."}, floats with 12 significant
// digits, no timestamps, so identical requests give identical bytes.

#include <string>

#include <json.hpp>

#include "circlekms/classifier.hpp"
#include "circlekms/measures.hpp"
#include "circlekms/verify.hpp"

namespace circlekms {

using Json = nlohmann::json;

Json to_json(const Rational& r);
/// Inverse of to_json for rationals. Throws ValidationError.
Rational rational_from_json(const Json& j);

Json map_json(const CircleMapPL& map);
Json entropy_json(const EntropyResult& h);
Json catalog_json(const CriticalCatalog& catalog);
Json report_json(const KmsReport& r);
Json measure_json(const AtomicMeasure& m);
Json maximal_measure_json(const DistributionApprox& nu);
Json verification_json(const VerificationReport& v);

/// Two-space indented, sorted keys, floats as %.12g, trailing newline.
std::string dump_canonical(const Json& j);

/// position_p,position_q,level,weight_num,weight_den,via_terminal
std::string atoms_csv(const AtomicMeasure& m, const CriticalCatalog& catalog);

}  // namespace circlekms
