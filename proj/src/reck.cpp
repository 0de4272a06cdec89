#include "qwit/reck.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "qwit/errors.hpp"
#include "qwit/io.hpp"

namespace qwit {

namespace {

bool block_is_unitary(const Matrix2c& b) {
    return ((b.adjoint() * b) - Matrix2c::Identity()).cwiseAbs().maxCoeff() <= tol::kInvariant;
}

Matrix2c swap_conjugate(const Matrix2c& b) {
    Matrix2c p;
    p << 0.0, 1.0, 1.0, 0.0;
    return p * b * p;
}

/// Stage index of E_{high,low} in the triangular mesh; rotations sharing a
/// stage touch disjoint levels and commute.
int mesh_stage(int dim, int high, int low) { return 2 * (dim - high) + (high - low); }

}  // namespace

ComplexMatrix TwoLevelRotation::embed(int dim) const {
    if (low < 1 || high <= low || high > dim) {
        throw ValidationError("TwoLevelRotation: need 1 <= low < high <= N");
    }
    ComplexMatrix e = ComplexMatrix::Identity(dim, dim);
    const int l = low - 1;
    const int h = high - 1;
    e(l, l) = block(0, 0);
    e(l, h) = block(0, 1);
    e(h, l) = block(1, 0);
    e(h, h) = block(1, 1);
    return e;
}

void validate_plan(const DecompositionPlan& plan) {
    const int n = plan.dim;
    if (n < 1) throw ValidationError("DecompositionPlan: dimension must be >= 1");
    if (static_cast<int>(plan.phase_diag.size()) != n) {
        throw DimensionError("DecompositionPlan: phase_diag must have N entries");
    }
    if (static_cast<int>(plan.rotations.size()) > n * (n - 1) / 2) {
        throw ValidationError("DecompositionPlan: more than N(N-1)/2 rotations");
    }
    for (const auto& r : plan.rotations) {
        if (r.low < 1 || r.high <= r.low || r.high > n) {
            throw ValidationError("DecompositionPlan: rotation modes out of range");
        }
        if (!block_is_unitary(r.block)) throw ValidationError("DecompositionPlan: rotation block not unitary");
    }
    for (const Complex& s : plan.phase_diag) {
        if (std::abs(std::abs(s) - 1.0) > tol::kInvariant) {
            throw ValidationError("DecompositionPlan: phase entry not unit modulus");
        }
    }
}

DecompositionPlan decompose(const UnitaryChannel& u) {
    const int n = u.dim();
    ComplexMatrix a = u.matrix();
    DecompositionPlan plan;
    plan.dim = n;

    // Right-multiply by E_{r,c} to null row r left of the diagonal, last row first:
    // U E_{N,N-1} E_{N,N-2} ... E_{2,1} = D, hence U = (E... D^-1)^-1.
    for (int r = n - 1; r >= 1; --r) {
        for (int c = r - 1; c >= 0; --c) {
            const Complex x = a(r, c);
            const Complex y = a(r, r);
            const double rho = std::hypot(std::abs(x), std::abs(y));
            TwoLevelRotation rot{r + 1, c + 1, Matrix2c::Identity()};
            if (rho > 0.0) {
                rot.block << y / rho, std::conj(x) / rho, -x / rho, std::conj(y) / rho;
                const ComplexVector col_c = a.col(c);
                const ComplexVector col_r = a.col(r);
                a.col(c) = col_c * rot.block(0, 0) + col_r * rot.block(1, 0);
                a.col(r) = col_c * rot.block(0, 1) + col_r * rot.block(1, 1);
                a(r, c) = 0.0;
            }
            plan.rotations.push_back(rot);
        }
    }
    for (int k = 0; k < n; ++k) {
        const Complex d = a(k, k);
        const double mag = std::abs(d);
        plan.phase_diag.push_back(mag > 0.0 ? std::conj(d) / mag : Complex(1.0, 0.0));
    }
    return plan;
}

UnitaryChannel reconstruct(const DecompositionPlan& plan) {
    validate_plan(plan);
    const int n = plan.dim;
    ComplexMatrix product = ComplexMatrix::Identity(n, n);
    for (const auto& r : plan.rotations) product = product * r.embed(n);
    for (int k = 0; k < n; ++k) product.col(k) *= plan.phase_diag[static_cast<std::size_t>(k)];
    // The product is unitary, so its inverse is its adjoint.
    ComplexMatrix inverse = product.adjoint();
    return UnitaryChannel::from_matrix(std::move(inverse));
}

// ---- layout -----------------------------------------------------------------

std::vector<Slot> encode_levels(int dim) {
    if (dim < 1) throw ValidationError("encode_levels: dimension must be >= 1");
    std::vector<Slot> slots;
    if (dim % 2 == 0) {
        for (int s = 1; s <= dim / 2; ++s) {
            slots.push_back({s, Polarization::H});
            slots.push_back({s, Polarization::V});
        }
    } else {
        slots.push_back({1, Polarization::H});
        for (int s = 2; s <= (dim + 1) / 2; ++s) {
            slots.push_back({s, Polarization::H});
            slots.push_back({s, Polarization::V});
        }
    }
    return slots;
}

int expected_bd_count(int dim) {
    if (dim <= 2) return 0;
    return dim % 2 == 0 ? 2 * dim - 4 : 2 * dim - 3;
}

namespace {

/// Routes levels through beam-displacer stages so that the two levels of every
/// rotation share a spatial mode, lower level on H, when the rotation's stage is
/// reached. Level N never moves; level j starts travelling at stage N-j, meets
/// N, N-1, ..., j+1 on consecutive stages, then parks one mode further on.
class MeshRouter {
public:
    MeshRouter(int dim, std::vector<Slot> start)
        : dim_(dim), slots_(std::move(start)), anchor_(slots_.back().mode) {}

    const std::vector<Slot>& slots() const { return slots_; }

    /// Emits the wave plates and one displacer leading into `stage`.
    void advance(int stage, std::vector<OpticalElement>& out) {
        std::map<int, std::vector<int>> by_mode;
        for (int lvl = 1; lvl <= dim_; ++lvl) by_mode[slot(lvl).mode].push_back(lvl);

        std::vector<int> movers;
        for (const auto& [mode, levels] : by_mode) {
            int mover = 0;
            int best_slack = 1 << 30;
            int must = 0;
            int stays = 0;
            for (int lvl : levels) {
                const auto need = requirement(lvl, stage, mode);
                if (need.kind == Need::Move) {
                    if (must != 0) fail(stage, "two levels must leave one mode");
                    must = lvl;
                } else if (need.kind == Need::Stay) {
                    ++stays;
                } else if (need.slack < best_slack) {
                    best_slack = need.slack;
                    mover = lvl;
                }
            }
            if (must != 0) {
                mover = must;
            } else if (levels.size() == 1) {
                mover = 0;  // a lone optional traveller waits
            } else if (stays == 2) {
                fail(stage, "both levels of a mode must stay");
            }
            if (levels.size() == 2 && mover == 0) fail(stage, "no level free to leave a full mode");
            if (mover != 0) movers.push_back(mover);

            // Set polarizations: the mover goes H, everything else V.
            bool swap = false;
            for (int lvl : levels) {
                const Polarization want = (lvl == mover) ? Polarization::H : Polarization::V;
                if (slot(lvl).pol != want) swap = true;
            }
            if (swap) {
                out.emplace_back(HalfWavePlate45{mode});
                for (int lvl : levels) {
                    auto& s = slot(lvl);
                    s.pol = (s.pol == Polarization::H) ? Polarization::V : Polarization::H;
                }
            }
        }
        displace(out);
        for (int lvl = 1; lvl <= dim_; ++lvl) {
            const int target = target_mode(lvl, stage);
            if (target != 0 && slot(lvl).mode != target) fail(stage, "level missed its meeting mode");
        }
    }

    void displace(std::vector<OpticalElement>& out) {
        out.emplace_back(BeamDisplacer{});
        for (auto& s : slots_) {
            if (s.pol == Polarization::H) ++s.mode;
        }
    }

    Slot& slot(int level) { return slots_[static_cast<std::size_t>(level - 1)]; }

private:
    enum class Need { Move, Stay, Optional };
    struct Requirement {
        Need kind;
        int slack = 0;
    };

    // Mode a level must occupy at `stage`, or 0 while it is still waiting.
    int target_mode(int level, int stage) const {
        if (level == dim_) return anchor_;
        const int start = dim_ - level;
        if (stage < start) return 0;
        if (stage <= 2 * (dim_ - level)) return anchor_ + (stage - start);
        return anchor_ + dim_ - level;
    }

    Requirement requirement(int level, int stage, int mode) const {
        const int target = target_mode(level, stage);
        if (target != 0) {
            if (target == mode + 1) return {Need::Move};
            if (target == mode) return {Need::Stay};
            fail(stage, "level is out of reach of its meeting mode");
        }
        const int moves_needed = anchor_ - mode;
        const int transitions_left = (dim_ - level) - stage + 1;
        const int slack = transitions_left - moves_needed;
        if (slack < 0) fail(stage, "level cannot reach the anchor mode in time");
        if (moves_needed == 0) return {Need::Stay};
        if (slack == 0) return {Need::Move};
        return {Need::Optional, slack};
    }

    [[noreturn]] void fail(int stage, const char* why) const {
        throw std::logic_error("emit_layout: routing failed at stage " + std::to_string(stage) + " for N=" +
                               std::to_string(dim_) + ": " + why);
    }

    int dim_;
    std::vector<Slot> slots_;
    int anchor_;
};

}  // namespace

OpticalLayout emit_layout(const DecompositionPlan& plan) {
    validate_plan(plan);
    const int n = plan.dim;
    OpticalLayout layout;
    layout.dim = n;
    layout.encoding = (n % 2 == 0) ? Encoding::Even : Encoding::Odd;
    layout.input_slots = encode_levels(n);

    std::map<int, std::vector<const TwoLevelRotation*>> stages;
    for (const auto& r : plan.rotations) stages[mesh_stage(n, r.high, r.low)].push_back(&r);

    MeshRouter router(n, layout.input_slots);
    if (n >= 2) {
        const int last_stage = 2 * n - 3;
        for (int stage = 1; stage <= last_stage; ++stage) {
            if (stage > 1) router.advance(stage, layout.elements);
            for (const TwoLevelRotation* r : stages[stage]) {
                const Slot lo = router.slot(r->low);
                const Slot hi = router.slot(r->high);
                if (lo.mode != hi.mode) throw std::logic_error("emit_layout: rotation levels not co-propagating");
                // The element applies E^dagger to the (low, high) amplitudes.
                Matrix2c physical = r->block.adjoint();
                if (lo.pol != Polarization::H) physical = swap_conjugate(physical);
                layout.elements.emplace_back(WavePlateSet{lo.mode, physical});
            }
        }
        // Odd N: return |1> to a spatial mode of its own, as on entry.
        if (n % 2 == 1) router.displace(layout.elements);
    }

    // Output phases S^-1, one wave-plate set per affected spatial mode.
    std::map<int, Matrix2c> phase_sets;
    for (int lvl = 1; lvl <= n; ++lvl) {
        const Complex phase = std::conj(plan.phase_diag[static_cast<std::size_t>(lvl - 1)]);
        if (phase == Complex(1.0, 0.0)) continue;
        const Slot s = router.slot(lvl);
        auto [it, inserted] = phase_sets.try_emplace(s.mode, Matrix2c::Identity());
        const int idx = (s.pol == Polarization::H) ? 0 : 1;
        it->second(idx, idx) = phase;
    }
    for (const auto& [mode, block] : phase_sets) layout.elements.emplace_back(WavePlateSet{mode, block});

    layout.output_slots = router.slots();
    layout.output_relabelled = layout.output_slots != layout.input_slots;
    for (const auto& e : layout.elements) {
        if (std::holds_alternative<BeamDisplacer>(e)) ++layout.bd_count;
    }
    return layout;
}

UnitaryChannel realized_unitary(const OpticalLayout& layout) {
    const int n = layout.dim;
    if (static_cast<int>(layout.input_slots.size()) != n || static_cast<int>(layout.output_slots.size()) != n) {
        throw DimensionError("realized_unitary: slot tables must have N entries");
    }
    using Key = std::pair<int, int>;  // (mode, 0 = H / 1 = V)
    auto key = [](const Slot& s) { return Key{s.mode, s.pol == Polarization::H ? 0 : 1}; };

    ComplexMatrix u(n, n);
    for (int col = 0; col < n; ++col) {
        std::map<Key, Complex> field;
        field[key(layout.input_slots[static_cast<std::size_t>(col)])] = 1.0;
        for (const auto& element : layout.elements) {
            if (const auto* w = std::get_if<WavePlateSet>(&element)) {
                const Complex h = field[{w->mode, 0}];
                const Complex v = field[{w->mode, 1}];
                field[{w->mode, 0}] = w->block(0, 0) * h + w->block(0, 1) * v;
                field[{w->mode, 1}] = w->block(1, 0) * h + w->block(1, 1) * v;
            } else if (const auto* hw = std::get_if<HalfWavePlate45>(&element)) {
                std::swap(field[{hw->mode, 0}], field[{hw->mode, 1}]);
            } else if (std::holds_alternative<BeamDisplacer>(element)) {
                std::map<Key, Complex> shifted;
                for (const auto& [k, amp] : field) {
                    const Key moved = (k.second == 0) ? Key{k.first + 1, 0} : k;
                    shifted[moved] += amp;
                }
                field = std::move(shifted);
            } else {
                throw ValidationError("realized_unitary: quartz crystals are not coherent elements");
            }
        }
        for (int row = 0; row < n; ++row) {
            const auto it = field.find(key(layout.output_slots[static_cast<std::size_t>(row)]));
            u(row, col) = (it == field.end()) ? Complex(0.0, 0.0) : it->second;
        }
    }
    return UnitaryChannel::from_matrix(std::move(u));
}

// ---- quartz ---------------------------------------------------------------------

void validate(const CoherenceSpec& spec) {
    const bool finite = std::isfinite(spec.wavelength_nm) && std::isfinite(spec.bandwidth_nm) &&
                        std::isfinite(spec.birefringence);
    if (!finite || spec.wavelength_nm <= 0.0 || spec.bandwidth_nm <= 0.0 || spec.birefringence <= 0.0) {
        throw ValidationError("CoherenceSpec: wavelength, bandwidth and birefringence must be positive");
    }
    if (spec.bandwidth_nm > spec.wavelength_nm) {
        throw ValidationError("CoherenceSpec: bandwidth exceeds wavelength");
    }
}

double coherence_length_mm(const CoherenceSpec& spec) {
    validate(spec);
    constexpr double kNmPerMm = 1e6;
    return spec.wavelength_nm * spec.wavelength_nm / spec.bandwidth_nm / kNmPerMm;
}

double min_quartz_thickness(const CoherenceSpec& spec) { return coherence_length_mm(spec) / spec.birefringence; }

bool quartz_is_sufficient(double thickness_mm, const CoherenceSpec& spec) {
    return thickness_mm >= min_quartz_thickness(spec);
}

OpticalLayout blind_measurement_layout(int dim, const CoherenceSpec& spec, std::optional<double> unit_thickness_mm) {
    if (dim < 2) throw ValidationError("blind_measurement_layout: dimension must be >= 2");
    const double minimum = min_quartz_thickness(spec);
    const double unit = unit_thickness_mm.value_or(minimum);
    if (!(unit >= minimum)) {
        throw ValidationError("blind_measurement_layout: crystal thinner than the minimum " + std::to_string(minimum) +
                              " mm");
    }
    OpticalLayout layout;
    layout.dim = dim;
    layout.encoding = (dim % 2 == 0) ? Encoding::Even : Encoding::Odd;
    layout.input_slots = encode_levels(dim);
    layout.output_slots = layout.input_slots;
    for (int lvl = 2; lvl <= dim; ++lvl) {
        const Slot s = layout.input_slots[static_cast<std::size_t>(lvl - 1)];
        layout.elements.emplace_back(QuartzCrystal{s.mode, s.pol, (lvl - 1) * unit});
    }
    return layout;
}

std::string to_string(Polarization pol) { return pol == Polarization::H ? "H" : "V"; }
std::string to_string(Encoding encoding) { return encoding == Encoding::Even ? "even" : "odd"; }

std::string layout_to_text(const OpticalLayout& layout) {
    std::ostringstream out;
    out << "layout dim=" << layout.dim << " encoding=" << to_string(layout.encoding)
        << " bd_count=" << layout.bd_count << " output_relabelled=" << (layout.output_relabelled ? "true" : "false")
        << '\n';
    for (std::size_t k = 0; k < layout.input_slots.size(); ++k) {
        const Slot& s = layout.input_slots[k];
        out << "input level=" << k + 1 << " mode=" << s.mode << " pol=" << to_string(s.pol) << '\n';
    }
    for (std::size_t k = 0; k < layout.elements.size(); ++k) {
        out << "element index=" << k << ' ';
        const auto& e = layout.elements[k];
        if (const auto* w = std::get_if<WavePlateSet>(&e)) {
            out << "kind=WavePlateSet mode=" << w->mode << " block=" << format_complex(w->block(0, 0)) << ','
                << format_complex(w->block(0, 1)) << ';' << format_complex(w->block(1, 0)) << ','
                << format_complex(w->block(1, 1));
        } else if (const auto* h = std::get_if<HalfWavePlate45>(&e)) {
            out << "kind=HalfWavePlate45 mode=" << h->mode;
        } else if (const auto* q = std::get_if<QuartzCrystal>(&e)) {
            out << "kind=QuartzCrystal mode=" << q->mode << " pol=" << to_string(q->pol)
                << " thickness_mm=" << format_double(q->thickness_mm);
        } else {
            out << "kind=BeamDisplacer";
        }
        out << '\n';
    }
    for (std::size_t k = 0; k < layout.output_slots.size(); ++k) {
        const Slot& s = layout.output_slots[k];
        out << "output level=" << k + 1 << " mode=" << s.mode << " pol=" << to_string(s.pol) << '\n';
    }
    return out.str();
}

}  // namespace qwit
