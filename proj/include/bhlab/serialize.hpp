#pragma once

#include <cstdint>
#include <string_view>

#include <json.hpp>

#include "bhlab/estimators.hpp"
#include "bhlab/geometry.hpp"
#include "bhlab/report.hpp"
#include "bhlab/sampler.hpp"

namespace bhlab::io {

/// FNV-1a 64-bit content hash; used for config and domain provenance.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

nlohmann::json domain_to_json(const geom::Domain& d);
geom::Domain domain_from_json(const nlohmann::json& j, const std::string& path = "domain");
std::uint64_t domain_hash(const geom::Domain& d);

nlohmann::json sampler_config_to_json(const mc::SamplerConfig& cfg);
mc::SamplerConfig sampler_config_from_json(const nlohmann::json& j, const std::string& path = "sampler");

nlohmann::json report_to_json(const expt::Report& r);

}  // namespace bhlab::io
