#include "scc/network.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace scc {

std::size_t bus_index(std::span<const Bus> buses, std::string_view id)
{
    const auto it = std::find_if(buses.begin(), buses.end(), [&](const Bus& b) { return b.id == id; });
    if (it == buses.end()) {
        throw NetworkError("unknown bus id '" + std::string(id) + "'");
    }
    return static_cast<std::size_t>(it - buses.begin());
}

void validate_buses(std::span<const Bus> buses)
{
    if (buses.empty()) {
        throw NetworkError("network has no buses");
    }
    std::set<std::string_view> seen;
    for (const Bus& b : buses) {
        if (b.id == ground_id) {
            throw NetworkError("bus id 'ground' is reserved");
        }
        if (!seen.insert(b.id).second) {
            throw NetworkError("duplicate bus id '" + b.id + "'");
        }
    }
}

std::string_view to_string(FaultKind kind)
{
    switch (kind) {
    case FaultKind::none:
        return "none";
    case FaultKind::three_phase_ground:
        return "3P2G";
    case FaultKind::phase_phase:
        return "P2P";
    case FaultKind::single_phase_ground:
        return "1P2G";
    }
    return "none";
}

std::optional<FaultKind> parse_fault_kind(std::string_view text)
{
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "none") {
        return FaultKind::none;
    }
    if (lower == "3p2g") {
        return FaultKind::three_phase_ground;
    }
    if (lower == "p2p") {
        return FaultKind::phase_phase;
    }
    if (lower == "1p2g") {
        return FaultKind::single_phase_ground;
    }
    return std::nullopt;
}

} // namespace scc
