#pragma once

#include "paratomo/fan_grid.hpp"
#include "paratomo/geodesic.hpp"
#include "paratomo/pair.hpp"

namespace paratomo {

/// Matrix-valued nodal data on a fan-beam grid.  Every node carries a
/// rows x cols complex matrix, stored packed column-major.  Scattering data
/// uses rows = cols = rank; transform values of vector fields use cols = 1.
struct FanData {
    FanPtr grid;
    int rows = 1, cols = 1;
    std::vector<Complex> v;

    FanData() = default;
    FanData(FanPtr g, int r, int c)
        : grid(std::move(g)), rows(r), cols(c), v(std::size_t(grid->count()) * r * c) {}

    int stride() const { return rows * cols; }
    Complex* node(int i, int j) { return &v[std::size_t(grid->idx(i, j)) * stride()]; }
    const Complex* node(int i, int j) const { return &v[std::size_t(grid->idx(i, j)) * stride()]; }

    CMat at(int i, int j) const {
        CMat m(rows, cols);
        const Complex* p = node(i, j);
        for (int c = 0; c < cols; ++c)
            for (int r = 0; r < rows; ++r) m(r, c) = *p++;
        return m;
    }
    void set(int i, int j, const CMat& m) {
        Complex* p = node(i, j);
        for (int c = 0; c < cols; ++c)
            for (int r = 0; r < rows; ++r) *p++ = m(r, c);
    }
    bool same_shape(const FanData& o) const {
        return grid->same_layout(*o.grid) && rows == o.rows && cols == o.cols;
    }
};

FanData operator+(const FanData& a, const FanData& b);
FanData operator-(const FanData& a, const FanData& b);
FanData operator*(Complex s, const FanData& a);

/// Quadrature inner product over the data space (tangential band trimmed),
/// hermitian in the second argument.
Complex fan_inner(const FanData& a, const FanData& b);
double fan_norm(const FanData& a);
/// Largest entry magnitude over all nodes (band included).
double fan_max(const FanData& a);
/// L2 norm plus first finite-difference seminorm in (beta, alpha).
double fan_h1_norm(const FanData& a);

/// Bilinear interpolation stencil at continuous fan coordinates; beta is
/// periodic, alpha clamped to the midpoint range.  Queries inside the trimmed
/// tangential band are masked (treated as zero data).
struct FanStencil {
    int n00 = -1, n01 = -1, n10 = -1, n11 = -1;
    double w00 = 0.0, w01 = 0.0, w10 = 0.0, w11 = 0.0;
    bool masked = true;
};
FanStencil fan_stencil(const FanBeamGrid& g, double beta, double alpha);

/// Bilinear sample at continuous fan coordinates (see fan_stencil); out must
/// hold rows*cols entries.
void fan_sample(const FanData& d, double beta, double alpha, Complex* out);

struct TransportResult {
    PhasePoint exit;
    double time = 0.0;
    CMat matrix;
};

/// Transport matrices sampled along one traced ray: U solves dU/dt + A U = 0
/// and W solves dW/dt = W A, both from the identity at the entry.  W is
/// integrated by its own equation, never by inverting U, so conditioning is
/// preserved for non-unitary attenuations; U(t) W(t) = id is a property to
/// test, not an identity of the construction.
struct TransportSolution {
    RayPath ray;
    std::vector<CMat> U, W;
};
TransportSolution transport_solution(const MetricField& m, const AttenuationPair& pair,
                                     const PhasePoint& start, Domain domain,
                                     const TraceOptions& opt = {});

/// Fundamental solution of the attenuated transport equation along the
/// geodesic through `start`: dU/dt + A(x,v) U = 0, U(0) = id; returns U at
/// the exit together with the exit phase point.
TransportResult fundamental_matrix(const MetricField& m, const AttenuationPair& pair,
                                   const PhasePoint& start, Domain domain,
                                   const TraceOptions& opt = {});

/// Scattering data: the fundamental solution evaluated at the exit for every
/// fan node (rows = cols = rank).
FanData scattering_data(const MetricField& m, const AttenuationPair& pair, FanPtr grid,
                        const TraceOptions& opt = {});

/// Entry description of the geodesic through an interior phase point: fan
/// coordinates of the entry, the time from entry to the query point, and the
/// weight W solving dW/dt = W A, W(entry) = id, evaluated at the query point.
/// Computed in a single pass along the reversed geodesic: the matrix
/// L(s) = W(t-s)^{-1} W(t) satisfies dL/ds = A(y(s), -y'(s)) L with L(0) = id
/// and equals W at the backward exit, so no inversion or second pass is
/// needed.
struct RaySource {
    double beta = 0.0, alpha = 0.0;
    double time = 0.0;
    CMat weight;
};
RaySource trace_to_source(const MetricField& m, const AttenuationPair& pair, const PhasePoint& at,
                          Domain domain, const TraceOptions& opt = {});

/// Weight W at an interior phase point (see trace_to_source).
CMat weight_at(const MetricField& m, const AttenuationPair& pair, const PhasePoint& at,
               Domain domain, const TraceOptions& opt = {});

/// First-integral extension of fan data: the value at the entry point of the
/// geodesic through (x, v), found by a backward geometric trace.  out must
/// hold rows*cols entries.
void extend_data(const MetricField& m, const FanData& data, const PhasePoint& at, Complex* out,
                 const TraceOptions& opt = {});

}  // namespace paratomo
