#pragma once

#include <stdexcept>

namespace qkerr {

// Composite space for one three-level coupler and two truncated resonator
// modes. Factor order is fixed as qutrit (x) resonator-a (x) resonator-b;
// every piece of index arithmetic in the library derives from it.
struct HilbertSpace {
    int dim_qutrit = 3;
    int dim_a = 0;  // Fock states |0..dim_a-1> of resonator a
    int dim_b = 0;

    HilbertSpace() = default;
    HilbertSpace(int da, int db) : dim_a(da), dim_b(db) {
        if (da < 2 || db < 2)
            throw std::invalid_argument("HilbertSpace: resonator truncation must be at least 2");
    }

    int total() const { return dim_qutrit * dim_a * dim_b; }

    // Flat index of the basis state |q, n_a, n_b>.
    int index(int q, int na, int nb) const { return (q * dim_a + na) * dim_b + nb; }

    int qutrit_of(int flat) const { return flat / (dim_a * dim_b); }
    int na_of(int flat) const { return (flat / dim_b) % dim_a; }
    int nb_of(int flat) const { return flat % dim_b; }

    bool operator==(const HilbertSpace&) const = default;
};

// Qutrit level labels with the fixed index map g->0, e->1, f->2.
enum class Level : int { g = 0, e = 1, f = 2 };

inline Level level_from_char(char c) {
    switch (c) {
        case 'g': return Level::g;
        case 'e': return Level::e;
        case 'f': return Level::f;
        default: throw std::invalid_argument("unknown qutrit level label");
    }
}

}  // namespace qkerr
