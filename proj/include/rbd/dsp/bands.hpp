#pragma once

#include <array>
#include <string>

namespace rbd::dsp {

struct Band {
    const char* name;
    double lo_hz;
    double hi_hz;
};

// Clinical EEG bands. The gamma upper edge is bounded by the 40 Hz EEG
// band-pass, so nothing above it survives preprocessing anyway.
inline constexpr Band kDelta{"delta", 0.5, 4.0};
inline constexpr Band kTheta{"theta", 4.0, 8.0};
inline constexpr Band kAlpha{"alpha", 8.0, 13.0};
inline constexpr Band kLowerAlpha{"lower_alpha", 8.0, 10.0};
inline constexpr Band kBeta{"beta", 13.0, 30.0};
inline constexpr Band kGamma{"gamma", 30.0, 40.0};

inline constexpr std::array<Band, 5> kEegBands = {kDelta, kTheta, kAlpha, kBeta, kGamma};

}  // namespace rbd::dsp
