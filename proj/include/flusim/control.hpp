#pragma once

#include "flusim/control_strategy.hpp"
#include "flusim/engine.hpp"

#include <span>

namespace flusim {

/// Applies every strategy active on world.day. Called once per day, after
/// movement and before contact selection. Resets world.effective_params and
/// world.contact_scale to their baseline first.
///
///   Awareness        p_quarantine -> p + coverage * (1 - p)
///   Vaccination      S and C -> M with probability coverage / window_length
///   SocialDistancing contact slots scaled by (1 - coverage), rounded down
///   Quarantining     I and NQ -> Q with probability coverage
void apply_controls(World& world, std::span<const ControlStrategy> strategies);

/// floor(base * scale) with a small tolerance for representation error.
int scaled_contacts(int base, double scale) noexcept;

} // namespace flusim
