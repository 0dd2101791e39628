#pragma once

#include "kyle/dist.hpp"

namespace kyle {

/// Primitives of one game: noise law, fundamental price law and the market
/// maker's revenue weight gamma.
struct ModelParams {
    NoiseLaw noise = NoiseLaw::gaussian(1.0);
    PriceLaw price{};
    double gamma = 0.0;

    void validate() const;
};

}  // namespace kyle
