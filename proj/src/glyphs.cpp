#include "daic/glyphs.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace daic {

namespace {

constexpr int kSide = 28;
constexpr double kPi = 3.14159265358979323846;

struct Point {
    double x;
    double y;
};

using Polyline = std::vector<Point>;

Polyline arc(double cx, double cy, double rx, double ry, double a0, double a1, int n) {
    Polyline p(n);
    for (int i = 0; i < n; ++i) {
        const double t = a0 + (a1 - a0) * i / (n - 1);
        p[i] = {cx + rx * std::cos(t), cy + ry * std::sin(t)};
    }
    return p;
}

Polyline seg(double x0, double y0, double x1, double y1) {
    return {{x0, y0}, {x1, y1}};
}

// Stroke skeletons per digit in a unit box (x right, y down).
std::vector<Polyline> skeleton(int digit) {
    switch (digit) {
        case 0:
            return {arc(.5, .5, .26, .38, 0, 2 * kPi, 48)};
        case 1:
            return {seg(.35, .25, .55, .12), seg(.55, .12, .55, .88)};
        case 2:
            return {arc(.5, .32, .22, .22, kPi, 2.35 * kPi, 24), seg(.66, .45, .3, .88),
                    seg(.3, .88, .72, .88)};
        case 3:
            return {arc(.47, .3, .2, .2, 0.9 * kPi, 2.4 * kPi, 24),
                    arc(.47, .68, .22, .22, 1.6 * kPi, 3.05 * kPi, 24)};
        case 4:
            return {seg(.6, .12, .25, .6), seg(.25, .6, .75, .6), seg(.6, .12, .6, .9)};
        case 5:
            return {seg(.68, .14, .32, .14), seg(.32, .14, .3, .48),
                    arc(.48, .64, .22, .22, 1.25 * kPi, 2.8 * kPi, 24)};
        case 6:
            return {arc(.52, .66, .22, .22, 0, 2 * kPi, 36),
                    arc(.62, .42, .32, .42, 0.95 * kPi, 1.45 * kPi, 18)};
        case 7:
            return {seg(.25, .14, .72, .14), seg(.72, .14, .42, .9)};
        case 8:
            return {arc(.5, .3, .17, .17, 0, 2 * kPi, 32), arc(.5, .68, .2, .2, 0, 2 * kPi, 32)};
        case 9:
            return {arc(.48, .34, .19, .2, 0, 2 * kPi, 32),
                    arc(.38, .55, .33, .42, 1.75 * kPi, 2.35 * kPi, 18)};
        default:
            throw ParameterError("render_glyph: digit must be in 0..9");
    }
}

}  // namespace

std::vector<double> render_glyph(int digit, std::uint64_t seed, const GlyphParams& params) {
    const std::vector<Polyline> skel = skeleton(digit);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Random affine distortion: rotation * shear * scale, plus translation.
    const double theta = 0.13 * gauss(rng);
    const double shear = 0.12 * gauss(rng);
    const double sx = 1.0 + 0.09 * gauss(rng);
    const double sy = 1.0 + 0.09 * gauss(rng);
    const double tx = 1.6 * gauss(rng);
    const double ty = 1.4 * gauss(rng);
    const double ca = std::cos(theta);
    const double sa = std::sin(theta);
    // [ca -sa; sa ca] * [1 shear; 0 1] * diag(sx, sy)
    const double a00 = ca * sx;
    const double a01 = (ca * shear - sa) * sy;
    const double a10 = sa * sx;
    const double a11 = (sa * shear + ca) * sy;

    const double thick = std::max(0.7, 1.25 + 0.22 * gauss(rng));
    const double amp = std::clamp(0.9 + 0.1 * gauss(rng), 0.55, 1.0);
    const double inv2t2 = 1.0 / (2.0 * thick * thick);

    std::vector<double> img(kSide * kSide, 0.0);

    auto splat = [&](double cx, double cy) {
        const int x0 = static_cast<int>(std::floor(cx)) - 2;
        const int y0 = static_cast<int>(std::floor(cy)) - 2;
        for (int yy = y0; yy < y0 + 5; ++yy) {
            if (yy < 0 || yy >= kSide) {
                continue;
            }
            for (int xx = x0; xx < x0 + 5; ++xx) {
                if (xx < 0 || xx >= kSide) {
                    continue;
                }
                const double d2 = (xx - cx) * (xx - cx) + (yy - cy) * (yy - cy);
                const double v = amp * std::exp(-d2 * inv2t2);
                double& px = img[yy * kSide + xx];
                px = std::max(px, v);
            }
        }
    };

    for (const Polyline& pl : skel) {
        // Jittered control points mapped into pixel coordinates.
        std::vector<Point> q(pl.size());
        for (std::size_t i = 0; i < pl.size(); ++i) {
            const double px = pl[i].x + params.jitter * gauss(rng) - 0.5;
            const double py = pl[i].y + params.jitter * gauss(rng) - 0.5;
            q[i] = {(a00 * px + a01 * py) * 22.0 + 13.5 + tx,
                    (a10 * px + a11 * py) * 22.0 + 13.5 + ty};
        }
        for (std::size_t i = 0; i + 1 < q.size(); ++i) {
            const double len = std::hypot(q[i + 1].x - q[i].x, q[i + 1].y - q[i].y);
            const int steps = std::max(2, static_cast<int>(len * 3.0));
            for (int s = 0; s < steps; ++s) {
                const double t = double(s) / (steps - 1);
                splat(q[i].x * (1.0 - t) + q[i + 1].x * t, q[i].y * (1.0 - t) + q[i + 1].y * t);
            }
        }
    }

    for (double& px : img) {
        if (unit(rng) < 0.5) {
            px += params.noise * gauss(rng);
        }
        px = std::clamp(px, 0.0, 1.0);
    }
    return img;
}

LabeledSet glyph_generate(int n, std::uint64_t seed, const GlyphParams& params) {
    if (n < 1) {
        throw ParameterError("glyph_generate: n must be >= 1");
    }
    const FormSpec forms = FormSpec::defaults();
    LabeledSet set;
    set.role = SetRole::pool;
    set.examples.resize(n);
    // Each glyph derives its own seed, so the parallel fill is deterministic.
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const int digit = i % kNumClasses;
        Example& ex = set.examples[i];
        ex.pixels = render_glyph(digit, derive_seed(seed, static_cast<std::uint64_t>(i)), params);
        ex.true_label = digit;
        ex.form_id = forms.form_of(digit);
    }
    std::mt19937_64 rng(derive_seed(seed, 0x5affeULL));
    std::shuffle(set.examples.begin(), set.examples.end(), rng);
    return set;
}

}  // namespace daic
