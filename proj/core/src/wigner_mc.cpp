#include "paramp/wigner_mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <string>
#include <thread>

namespace paramp {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// xoshiro256++, seeded through splitmix64.
class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed) {
        for (auto& word : s_) word = splitmix64(seed);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in (0, 1]
    double uniform() { return (next() >> 11) * 0x1.0p-53 + 0x1.0p-54; }

    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double factor = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * factor;
        has_spare_ = true;
        return u * factor;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

struct SdeCoefficients {
    int n_modes = 0;
    double half_kappa[3] = {0.0, 0.0, 0.0};
    double noise_amp[3] = {0.0, 0.0, 0.0};  // sqrt(kappa/4)
    complex drive[3];                        // -i eps_m
    double g = 0.0;
    bool degenerate = false;
};

SdeCoefficients build_coefficients(const AmplifierModel& model, const DriveConditions& drive) {
    SdeCoefficients c;
    c.degenerate = model.degenerate();
    c.n_modes = c.degenerate ? 2 : 3;
    c.g = model.coupling;

    const double kappas[3] = {
        model.signal_mode.kappa,
        c.degenerate ? model.pump_mode.kappa : model.idler_mode->kappa,
        model.pump_mode.kappa,
    };
    for (int i = 0; i < c.n_modes; ++i) {
        c.half_kappa[i] = 0.5 * kappas[i];
        c.noise_amp[i] = std::sqrt(kappas[i] / 4.0);
    }
    const complex a_in = std::sqrt(drive.signal_flux) *
                         std::exp(complex(0.0, drive.signal_phase));
    const complex c_in = drive.pump_flux_amplitude *
                         std::exp(complex(0.0, -drive.pump_phase));
    c.drive[0] = std::sqrt(model.signal_mode.kappa) * a_in;
    c.drive[c.n_modes - 1] = std::sqrt(model.pump_mode.kappa) * c_in;
    if (!c.degenerate) c.drive[1] = 0.0;
    return c;
}

double fastest_rate(const AmplifierModel& model, const DriveConditions& drive) {
    double rate = std::max(model.signal_mode.kappa, model.pump_mode.kappa);
    if (model.idler_mode) rate = std::max(rate, model.idler_mode->kappa);
    // Parametric rates at the operating point: the squeezing term scales like
    // kappa_a * c0 / 2 where c0 ~ rho0.
    const double rho0 = reduced_coupling(model, drive);
    rate = std::max(rate, 0.5 * model.signal_mode.kappa * rho0);
    return rate;
}

}  // namespace

TrajectoryEnsemble simulate(const AmplifierModel& model, const DriveConditions& drive,
                            const EnsembleConfig& config) {
    model.validate();
    drive.validate();
    if (!resonant_pumping(model, drive)) {
        throw InvalidParameter("truncated-Wigner integration requires resonant pumping");
    }
    if (config.n_trajectories <= 0 || config.n_samples <= 0) {
        throw InvalidParameter("need at least one trajectory and one sample");
    }
    if (!(config.t_final > config.burn_in)) {
        throw InvalidParameter("t_final must exceed burn_in");
    }
    if (!config.initial_means.empty() &&
        config.initial_means.size() != static_cast<size_t>(model.degenerate() ? 2 : 3)) {
        throw InvalidParameter("initial_means must carry one amplitude per mode");
    }

    const SdeCoefficients coeff = build_coefficients(model, drive);
    const double rate = fastest_rate(model, drive);
    const double dt = config.dt > 0.0 ? config.dt : config.dt_factor / rate;
    if (dt > 0.01 / rate) {
        throw InvalidParameter("dt exceeds the stability guard 0.01 / max rate");
    }

    const long burn_steps = std::lround(config.burn_in / dt);
    const long total_steps = std::lround(config.t_final / dt);
    const long sample_stride = std::max(1l, (total_steps - burn_steps) / config.n_samples);

    TrajectoryEnsemble ensemble;
    ensemble.n_modes = coeff.n_modes;
    ensemble.n_traj = config.n_trajectories;
    ensemble.n_samples = config.n_samples;
    ensemble.dt = dt;
    ensemble.burn_in = config.burn_in;
    ensemble.t_final = config.t_final;
    ensemble.master_seed = config.master_seed;
    ensemble.samples.resize(static_cast<size_t>(config.n_trajectories) * config.n_samples *
                            coeff.n_modes);

    std::atomic<bool> blew_up{false};

    const bool heun = config.integrator == SdeIntegrator::Heun;
    auto drift = [&coeff](const complex* z, complex* d) {
        if (coeff.degenerate) {
            const complex a = z[0], c = z[1];
            d[0] = -coeff.half_kappa[0] * a - 2.0 * coeff.g * std::conj(a) * c + coeff.drive[0];
            d[1] = -coeff.half_kappa[1] * c + coeff.g * a * a + coeff.drive[1];
        } else {
            const complex a = z[0], b = z[1], c = z[2];
            d[0] = -coeff.half_kappa[0] * a - coeff.g * std::conj(b) * c + coeff.drive[0];
            d[1] = -coeff.half_kappa[1] * b - coeff.g * std::conj(a) * c + coeff.drive[1];
            d[2] = -coeff.half_kappa[2] * c + coeff.g * a * b + coeff.drive[2];
        }
    };

    auto run_block = [&](int traj_begin, int traj_end) {
        const int m = coeff.n_modes;
        const double sqrt_dt = std::sqrt(dt);
        const double guard2 = config.amplitude_guard * config.amplitude_guard;
        for (int traj = traj_begin; traj < traj_end; ++traj) {
            if (blew_up.load(std::memory_order_relaxed)) return;
            std::uint64_t seed_state = config.master_seed ^
                                       (0x632be59bd9b4e019ull * (std::uint64_t(traj) + 1));
            Xoshiro256 rng(splitmix64(seed_state));
            complex z[3];
            for (int i = 0; i < m; ++i) {
                z[i] = 0.5 * complex(rng.gaussian(), rng.gaussian());  // vacuum, var 1/4
                if (!config.initial_means.empty()) z[i] += config.initial_means[i];
            }
            int sample_index = 0;
            long next_sample = burn_steps + sample_stride;
            for (long step = 1; step <= total_steps; ++step) {
                complex d[3], noise[3];
                drift(z, d);
                for (int i = 0; i < m; ++i) {
                    noise[i] = coeff.noise_amp[i] * sqrt_dt *
                               complex(rng.gaussian(), rng.gaussian());
                }
                if (heun) {
                    complex predictor[3], d2[3];
                    for (int i = 0; i < m; ++i) predictor[i] = z[i] + d[i] * dt + noise[i];
                    drift(predictor, d2);
                    for (int i = 0; i < m; ++i) {
                        z[i] += 0.5 * (d[i] + d2[i]) * dt + noise[i];
                    }
                } else {
                    for (int i = 0; i < m; ++i) z[i] += d[i] * dt + noise[i];
                }
                if (std::norm(z[0]) > guard2) {
                    blew_up.store(true, std::memory_order_relaxed);
                    return;
                }
                if (step == next_sample && sample_index < config.n_samples) {
                    const size_t base =
                        (static_cast<size_t>(traj) * config.n_samples + sample_index) * m;
                    for (int i = 0; i < m; ++i) ensemble.samples[base + i] = z[i];
                    ++sample_index;
                    next_sample += sample_stride;
                }
            }
            // Fill any samples the stride arithmetic left behind with the
            // final state (only when (total-burn) < n_samples steps).
            while (sample_index < config.n_samples) {
                const size_t base =
                    (static_cast<size_t>(traj) * config.n_samples + sample_index) * m;
                for (int i = 0; i < m; ++i) ensemble.samples[base + i] = z[i];
                ++sample_index;
            }
        }
    };

    int n_threads = config.n_threads > 0
        ? config.n_threads
        : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::max(1, std::min(n_threads, config.n_trajectories));
    if (n_threads == 1) {
        run_block(0, config.n_trajectories);
    } else {
        std::vector<std::thread> workers;
        const int chunk = (config.n_trajectories + n_threads - 1) / n_threads;
        for (int t = 0; t < n_threads; ++t) {
            const int begin = t * chunk;
            const int end = std::min(config.n_trajectories, begin + chunk);
            if (begin >= end) break;
            workers.emplace_back(run_block, begin, end);
        }
        for (auto& worker : workers) worker.join();
    }
    if (blew_up.load()) {
        std::ostringstream os;
        os << "trajectory amplitude exceeded " << config.amplitude_guard
           << "; reduce dt or the drive";
        throw StepInstability(os.str());
    }
    return ensemble;
}

SampleCovariance sample_covariance(const TrajectoryEnsemble& ensemble) {
    const int m = ensemble.n_modes;
    const int dim = 2 * m;
    const long n_total = static_cast<long>(ensemble.n_traj) * ensemble.n_samples;
    if (n_total < 100) {
        throw InsufficientSamples("need at least 100 samples for a covariance estimate");
    }

    auto quad = [&](int traj, int sample) {
        Eigen::VectorXd v(dim);
        for (int i = 0; i < m; ++i) {
            const complex z = ensemble.at(traj, sample, i);
            v(i) = z.real();
            v(m + i) = z.imag();
        }
        return v;
    };

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    for (int traj = 0; traj < ensemble.n_traj; ++traj) {
        for (int s = 0; s < ensemble.n_samples; ++s) mean += quad(traj, s);
    }
    mean /= static_cast<double>(n_total);

    // Batch means across trajectories: each trajectory contributes one mean
    // vector and one covariance estimate; the scatter of those across the
    // (independent) trajectories gives the standard errors.
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::MatrixXd cov2 = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd mean2 = Eigen::VectorXd::Zero(dim);
    for (int traj = 0; traj < ensemble.n_traj; ++traj) {
        Eigen::VectorXd batch_mean = Eigen::VectorXd::Zero(dim);
        Eigen::MatrixXd batch_cov = Eigen::MatrixXd::Zero(dim, dim);
        for (int s = 0; s < ensemble.n_samples; ++s) {
            const Eigen::VectorXd v = quad(traj, s) - mean;
            batch_mean += v;
            batch_cov += v * v.transpose();
        }
        batch_mean /= ensemble.n_samples;
        batch_cov /= ensemble.n_samples;
        cov += batch_cov;
        cov2 += batch_cov.cwiseProduct(batch_cov);
        mean2 += batch_mean.cwiseProduct(batch_mean);
    }
    const double n_traj = ensemble.n_traj;
    cov /= n_traj;
    SampleCovariance out;
    out.mean = mean;
    out.covariance = cov * (n_total / (n_total - 1.0));
    out.covariance_se = ((cov2 / n_traj - cov.cwiseProduct(cov)) / n_traj)
                            .cwiseMax(0.0)
                            .cwiseSqrt();
    out.mean_se = (mean2 / (n_traj * n_traj)).cwiseMax(0.0).cwiseSqrt();
    out.n_effective = n_total;
    return out;
}

FluxEstimate output_flux_estimate(const TrajectoryEnsemble& ensemble,
                                  const AmplifierModel& model, const DriveConditions& drive) {
    const SampleCovariance stats = sample_covariance(ensemble);
    const double kappa_a = model.signal_mode.kappa;
    const complex a_in = std::sqrt(drive.signal_flux) *
                         std::exp(complex(0.0, drive.signal_phase));
    const complex mean_alpha(stats.mean(0), stats.mean(ensemble.n_modes));
    const complex a_out = -a_in + std::sqrt(kappa_a) * mean_alpha;

    const double var_total = stats.covariance(0, 0) +
                             stats.covariance(ensemble.n_modes, ensemble.n_modes);
    FluxEstimate estimate;
    estimate.flux = std::norm(a_out) + kappa_a * (var_total - 0.5);
    const double var_se = std::hypot(stats.covariance_se(0, 0),
                                     stats.covariance_se(ensemble.n_modes, ensemble.n_modes));
    const double mean_se = std::hypot(stats.mean_se(0), stats.mean_se(ensemble.n_modes));
    estimate.std_error = kappa_a * std::hypot(var_se, 2.0 * std::abs(a_out) * mean_se /
                                                          std::sqrt(kappa_a));
    return estimate;
}

double excess_kurtosis(const TrajectoryEnsemble& ensemble, int mode, int quadrature) {
    const long n_total = static_cast<long>(ensemble.n_traj) * ensemble.n_samples;
    if (n_total < 100) {
        throw InsufficientSamples("need at least 100 samples for a kurtosis estimate");
    }
    auto component = [&](int traj, int s) {
        const complex z = ensemble.at(traj, s, mode);
        return quadrature == 0 ? z.real() : z.imag();
    };
    double mean = 0.0;
    for (int traj = 0; traj < ensemble.n_traj; ++traj) {
        for (int s = 0; s < ensemble.n_samples; ++s) mean += component(traj, s);
    }
    mean /= n_total;
    double m2 = 0.0, m4 = 0.0;
    for (int traj = 0; traj < ensemble.n_traj; ++traj) {
        for (int s = 0; s < ensemble.n_samples; ++s) {
            const double v = component(traj, s) - mean;
            const double v2 = v * v;
            m2 += v2;
            m4 += v2 * v2;
        }
    }
    m2 /= n_total;
    m4 /= n_total;
    return m4 / (m2 * m2) - 3.0;
}

double phase_spread(const TrajectoryEnsemble& ensemble, int mode) {
    double cx = 0.0, cy = 0.0;
    long n = 0;
    for (int traj = 0; traj < ensemble.n_traj; ++traj) {
        for (int s = 0; s < ensemble.n_samples; ++s) {
            const complex z = ensemble.at(traj, s, mode);
            if (std::abs(z) == 0.0) continue;
            const double phi = std::arg(z);
            cx += std::cos(phi);
            cy += std::sin(phi);
            ++n;
        }
    }
    if (n == 0) return 1.0;
    return 1.0 - std::hypot(cx, cy) / static_cast<double>(n);
}

Histogram2D histogram2d(const TrajectoryEnsemble& ensemble, int mode, int nx, int ny,
                        double x_min, double x_max, double y_min, double y_max) {
    Histogram2D hist;
    hist.nx = nx;
    hist.ny = ny;
    if (x_min == x_max || y_min == y_max) {
        double lo_x = 0.0, hi_x = 0.0, lo_y = 0.0, hi_y = 0.0;
        bool first = true;
        for (int traj = 0; traj < ensemble.n_traj; ++traj) {
            for (int s = 0; s < ensemble.n_samples; ++s) {
                const complex z = ensemble.at(traj, s, mode);
                if (first) {
                    lo_x = hi_x = z.real();
                    lo_y = hi_y = z.imag();
                    first = false;
                } else {
                    lo_x = std::min(lo_x, z.real());
                    hi_x = std::max(hi_x, z.real());
                    lo_y = std::min(lo_y, z.imag());
                    hi_y = std::max(hi_y, z.imag());
                }
            }
        }
        const double pad_x = 0.05 * (hi_x - lo_x + 1e-300);
        const double pad_y = 0.05 * (hi_y - lo_y + 1e-300);
        hist.x_min = lo_x - pad_x;
        hist.x_max = hi_x + pad_x;
        hist.y_min = lo_y - pad_y;
        hist.y_max = hi_y + pad_y;
    } else {
        hist.x_min = x_min;
        hist.x_max = x_max;
        hist.y_min = y_min;
        hist.y_max = y_max;
    }
    hist.counts.assign(static_cast<size_t>(nx) * ny, 0.0);
    const double wx = nx / (hist.x_max - hist.x_min);
    const double wy = ny / (hist.y_max - hist.y_min);
    for (int traj = 0; traj < ensemble.n_traj; ++traj) {
        for (int s = 0; s < ensemble.n_samples; ++s) {
            const complex z = ensemble.at(traj, s, mode);
            const int ix = static_cast<int>((z.real() - hist.x_min) * wx);
            const int iy = static_cast<int>((z.imag() - hist.y_min) * wy);
            if (ix < 0 || ix >= nx || iy < 0 || iy >= ny) continue;
            hist.counts[static_cast<size_t>(iy) * nx + ix] += 1.0;
        }
    }
    return hist;
}

std::string histogram_to_text(const Histogram2D& hist) {
    std::ostringstream os;
    os.precision(12);
    os << "# x_axis " << hist.x_min << " " << hist.x_max << " " << hist.nx << "\n";
    os << "# y_axis " << hist.y_min << " " << hist.y_max << " " << hist.ny << "\n";
    for (int iy = 0; iy < hist.ny; ++iy) {
        for (int ix = 0; ix < hist.nx; ++ix) {
            if (ix) os << " ";
            os << hist.counts[static_cast<size_t>(iy) * hist.nx + ix];
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace paramp
