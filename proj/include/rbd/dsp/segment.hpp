#pragma once

// 30-s epoch / 10-s mini-epoch grid over a continuous signal. Views are
// spans into the caller's buffer; a trailing partial epoch is discarded.

#include <cstddef>
#include <span>
#include <vector>

#include "rbd/errors.hpp"

namespace rbd::dsp {

struct EpochGrid {
    double epoch_len = 30.0;
    double mini_len = 10.0;
    double rate = 200.0;
    std::size_t n_epochs = 0;

    std::size_t samples_per_epoch() const { return static_cast<std::size_t>(epoch_len * rate); }
    std::size_t samples_per_mini() const { return static_cast<std::size_t>(mini_len * rate); }
    std::size_t minis_per_epoch() const {
        return static_cast<std::size_t>(epoch_len / mini_len + 0.5);
    }
};

inline EpochGrid make_grid(std::size_t n_samples, double rate, double epoch_len = 30.0,
                           double mini_len = 10.0) {
    if (rate <= 0.0) throw ArgumentError("grid rate must be positive");
    EpochGrid g;
    g.epoch_len = epoch_len;
    g.mini_len = mini_len;
    g.rate = rate;
    const auto per_epoch = g.samples_per_epoch();
    if (per_epoch == 0 || n_samples < per_epoch)
        throw EmptyGridError("signal shorter than one epoch");
    g.n_epochs = n_samples / per_epoch;
    return g;
}

inline std::span<const double> epoch_view(std::span<const double> x, const EpochGrid& g,
                                          std::size_t epoch) {
    if (epoch >= g.n_epochs) throw ArgumentError("epoch index out of range");
    return x.subspan(epoch * g.samples_per_epoch(), g.samples_per_epoch());
}

inline std::span<const double> mini_view(std::span<const double> x, const EpochGrid& g,
                                         std::size_t epoch, std::size_t mini) {
    if (mini >= g.minis_per_epoch()) throw ArgumentError("mini-epoch index out of range");
    return epoch_view(x, g, epoch).subspan(mini * g.samples_per_mini(), g.samples_per_mini());
}

}  // namespace rbd::dsp
