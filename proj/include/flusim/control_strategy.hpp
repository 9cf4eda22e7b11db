#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace flusim {

enum class ControlKind { Awareness, Vaccination, SocialDistancing, Quarantining };

std::string_view control_kind_name(ControlKind kind) noexcept;
std::optional<ControlKind> control_kind_from_name(std::string_view name) noexcept;

struct ControlStrategy {
    ControlKind kind = ControlKind::Awareness;
    double coverage = 0.0;
    int start_day = 0;
    int end_day = 0;

    bool active_on(int day) const noexcept { return start_day <= day && day <= end_day; }
    int window_length() const noexcept { return end_day - start_day + 1; }
    bool operator==(const ControlStrategy&) const = default;
};

/// Throws std::invalid_argument naming strategies[i].field on the first problem,
/// including overlapping windows of the same kind.
void validate_strategies(std::span<const ControlStrategy> strategies);

} // namespace flusim
