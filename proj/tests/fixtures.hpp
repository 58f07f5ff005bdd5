#pragma once

#include <solman/config.hpp>
#include <solman/solman.hpp>

namespace fixtures {

inline const solman::Problem& lin() {
    static const solman::Problem P = solman::problem_from_json(solman::lin_config());
    return P;
}

inline const solman::Problem& sin() {
    static const solman::Problem P = solman::problem_from_json(solman::sin_config());
    return P;
}

// LIN with the exact constant c = 2 instead of the sampled, padded one
inline const solman::Problem& lin_c2() {
    static const solman::Problem P = [] {
        auto j = solman::lin_config();
        j["c"] = 2.0;
        return solman::problem_from_json(j);
    }();
    return P;
}

} // namespace fixtures
