#include "scts/policies.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>

#include "scts/errors.hpp"
#include "scts/linalg.hpp"

namespace scts {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::VectorXd actions_as_vector(const std::vector<int>& actions) {
    Eigen::VectorXd v(actions.size());
    for (size_t i = 0; i < actions.size(); ++i) v(i) = actions[i];
    return v;
}

}  // namespace

std::string design_kind_name(DesignKind kind) {
    switch (kind) {
        case DesignKind::Scts: return "scts";
        case DesignKind::Ucb: return "ucb";
        case DesignKind::Fixed: return "fixed";
        case DesignKind::Switchback: return "switchback";
    }
    throw ConfigError("unknown design kind");
}

DesignKind parse_design_kind(const std::string& name) {
    if (name == "scts") return DesignKind::Scts;
    if (name == "ucb") return DesignKind::Ucb;
    if (name == "fixed") return DesignKind::Fixed;
    if (name == "switchback") return DesignKind::Switchback;
    throw ConfigError("unknown design: '" + name + "'");
}

DonorTrace::DonorTrace(const PanelGenerator& gen, int rank) : rank_(rank) {
    if (rank < 1) throw ConfigError("trace rank must be >= 1");
    int n = gen.donors();
    int e = gen.epochs();
    if (e < 1) throw ConfigError("trace needs at least one epoch");
    donor_mat_.resize(n, e);
    for (int t = 0; t < e; ++t) donor_mat_.col(t) = gen.donor_column(t);

    first_ = std::max(gen.pre_treatment(), 1);
    u_.reserve(e - first_ + 1);
    sv_.reserve(e - first_ + 1);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
    for (int t = 1; t <= e; ++t) {
        gram.selfadjointView<Eigen::Lower>().rankUpdate(donor_mat_.col(t - 1));
        if (t >= first_) {
            Eigen::MatrixXd u;
            Eigen::VectorXd sv;
            decompose(t, u, sv, gram);
            u_.push_back(std::move(u));
            sv_.push_back(std::move(sv));
        }
    }
}

void DonorTrace::decompose(int t, Eigen::MatrixXd& u_out, Eigen::VectorXd& sv_out,
                           const Eigen::MatrixXd& gram) const {
    int n = static_cast<int>(donor_mat_.rows());
    int k = std::min({rank_, n, t});
    Eigen::MatrixXd full = gram.selfadjointView<Eigen::Lower>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(full);
    if (es.info() != Eigen::Success) throw RankError("eigendecomposition failed");
    u_out.resize(n, k);
    sv_out.resize(k);
    for (int j = 0; j < k; ++j) {
        int src = n - 1 - j;   // eigenvalues come back ascending
        u_out.col(j) = es.eigenvectors().col(src);
        sv_out(j) = std::sqrt(std::max(es.eigenvalues()(src), 0.0));
    }
    Eigen::MatrixXd none(u_out.rows(), 0);
    fix_factor_signs(u_out, none);
}

const Eigen::MatrixXd& DonorTrace::u(int t) const {
    if (t < first_ || t > epochs()) throw ConfigError("trace epoch out of range");
    return u_[t - first_];
}

const Eigen::VectorXd& DonorTrace::sv(int t) const {
    if (t < first_ || t > epochs()) throw ConfigError("trace epoch out of range");
    return sv_[t - first_];
}

LatentEstimate DonorTrace::latent_at(int t) const {
    if (t < 1 || t > epochs()) throw ConfigError("trace epoch out of range");
    Eigen::MatrixXd u_local;
    Eigen::VectorXd sv_local;
    const Eigen::MatrixXd* u_p = nullptr;
    const Eigen::VectorXd* sv_p = nullptr;
    if (t >= first_) {
        u_p = &u(t);
        sv_p = &sv(t);
    } else {
        Eigen::MatrixXd y = donor_mat_.leftCols(t);
        Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(donor_mat_.rows(), donor_mat_.rows());
        gram.selfadjointView<Eigen::Lower>().rankUpdate(y);
        decompose(t, u_local, sv_local, gram);
        u_p = &u_local;
        sv_p = &sv_local;
    }
    int n = donors();
    int k = static_cast<int>(sv_p->size());
    LatentEstimate est;
    est.rank_used = k;
    est.U_hat = Eigen::MatrixXd::Zero(n, rank_);
    est.U_hat.leftCols(k) = *u_p;
    est.singular_values = Eigen::VectorXd::Zero(rank_);
    est.singular_values.head(k) = *sv_p;
    est.Z_hat = Eigen::MatrixXd::Zero(t, rank_);
    est.Z_hat.leftCols(k) =
        donor_mat_.leftCols(t).transpose() * (*u_p) / std::sqrt(static_cast<double>(n));
    return est;
}

namespace {

RidgeFit fit_on_panel(const PanelData& panel, LatentEstimate& latent, int rank, double rho) {
    int t = panel.epochs();
    if (t >= 1) {
        latent = estimate_factors(panel.donor_obs, rank);
    } else {
        latent = LatentEstimate{};
        latent.Z_hat.resize(0, rank);
        latent.singular_values = Eigen::VectorXd::Zero(rank);
        latent.U_hat.resize(panel.donor_obs.rows(), rank);
        latent.U_hat.setZero();
    }
    return fit_ridge(panel.unit_obs, actions_as_vector(panel.actions), latent.Z_hat, rho);
}

}  // namespace

int scts_step(PolicyState& state, const PanelData& panel) {
    state.current_fit = fit_on_panel(panel, state.latent, state.rank, state.rho);
    state.last_beta = state.beta.at(std::max(1, panel.epochs()));
    double u = state.rng.next_uniform();
    state.last_tau_tilde = state.current_fit.tau_hat +
                           (2.0 * u - 1.0) * state.last_beta * state.current_fit.sigma_hat;
    return state.last_tau_tilde >= 0.0 ? 1 : 0;
}

int ucb_step(PolicyState& state, const PanelData& panel) {
    state.current_fit = fit_on_panel(panel, state.latent, state.rank, state.rho);
    state.last_beta = state.beta.at(std::max(1, panel.epochs()));
    state.last_tau_tilde = kNaN;
    double ucb = state.current_fit.tau_hat + state.last_beta * state.current_fit.sigma_hat;
    return ucb >= 0.0 ? 1 : 0;
}

RegretTrace compute_regret(double tau_star, const std::vector<int>& treatment_actions) {
    RegretTrace trace;
    if (!std::isfinite(tau_star)) return trace;
    int optimal = tau_star >= 0.0 ? 1 : 0;
    trace.per_epoch.reserve(treatment_actions.size());
    for (int a : treatment_actions) {
        bool suboptimal = a != optimal;
        trace.per_epoch.push_back(suboptimal ? std::abs(tau_star) : 0.0);
        if (suboptimal) ++trace.suboptimal_count;
    }
    trace.total = std::abs(tau_star) * trace.suboptimal_count;
    return trace;
}

ExperimentResult run_experiment(const DesignConfig& config, const PanelGenerator& gen,
                                double tau_star, const DonorTrace* trace) {
    if (config.rank < 1) throw ConfigError("design rank must be >= 1");
    if (config.rho <= 0.0) throw ConfigError("rho must be > 0");
    if (config.refresh_every < 1) throw ConfigError("refresh_every must be >= 1");

    int n = gen.donors();
    int e = gen.epochs();
    int t0 = gen.pre_treatment();
    int horizon = e - t0;
    bool needs_fit = config.kind == DesignKind::Scts || config.kind == DesignKind::Ucb;

    std::unique_ptr<DonorTrace> local_trace;
    if (trace) {
        if (trace->rank() != config.rank || trace->donors() != n || trace->epochs() != e)
            throw ConfigError("shared trace does not match this experiment");
    } else if (needs_fit) {
        local_trace = std::make_unique<DonorTrace>(gen, config.rank);
        trace = local_trace.get();
    }

    ExperimentResult result;
    result.config = config;
    result.tau_star = tau_star;
    result.panel.pre_treatment = t0;
    result.panel.donor_obs.resize(n, e);
    result.panel.unit_obs.resize(e);
    result.panel.actions.assign(e, 0);

    int d = config.rank + 1;
    Eigen::VectorXd s_q = Eigen::VectorXd::Zero(n);   // sum of y0_s * donor column s
    Eigen::VectorXd s_w = Eigen::VectorXd::Zero(n);   // sum over treated epochs of columns
    double s_aa = 0.0, s_ay = 0.0;
    double root_n = std::sqrt(static_cast<double>(n));

    auto observe = [&](int t_idx, int action) {
        Eigen::VectorXd col =
            trace ? Eigen::VectorXd(trace->donor_matrix().col(t_idx)) : gen.donor_column(t_idx);
        double y = gen.unit_value(t_idx, action);
        result.panel.donor_obs.col(t_idx) = col;
        result.panel.unit_obs(t_idx) = y;
        result.panel.actions[t_idx] = action;
        s_q += y * col;
        if (action == 1) {
            s_w += col;
            s_aa += 1.0;
            s_ay += y;
        }
    };

    auto fit_at = [&](int t_obs) -> RidgeFit {
        Eigen::MatrixXd omega_data = Eigen::MatrixXd::Zero(d, d);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
        omega_data(0, 0) = s_aa;
        rhs(0) = s_ay;
        if (t_obs >= 1) {
            const Eigen::MatrixXd& u = trace->u(t_obs);
            const Eigen::VectorXd& sv = trace->sv(t_obs);
            int k = static_cast<int>(sv.size());
            Eigen::VectorXd v_az = u.transpose() * s_w / root_n;
            Eigen::VectorXd rhs_z = u.transpose() * s_q / root_n;
            for (int j = 0; j < k; ++j) {
                omega_data(0, j + 1) = v_az(j);
                omega_data(j + 1, 0) = v_az(j);
                omega_data(j + 1, j + 1) = sv(j) * sv(j) / n;
                rhs(j + 1) = rhs_z(j);
            }
        }
        return fit_ridge_from_stats(omega_data, rhs, config.rho);
    };

    for (int t_idx = 0; t_idx < t0; ++t_idx) observe(t_idx, 0);

    RngStream sampler(config.sampler_seed);
    RidgeFit current;
    Eigen::MatrixXd omega_bar = config.rho * Eigen::MatrixXd::Identity(d, d);
    result.fits.reserve(needs_fit ? horizon : 0);

    for (int step = 1; step <= horizon; ++step) {
        int t_obs = t0 + step - 1;
        int action = 0;
        if (needs_fit) {
            if ((step - 1) % config.refresh_every == 0) current = fit_at(t_obs);
            double beta = config.beta.at(std::max(1, t_obs));
            double tau_tilde = kNaN;
            if (config.kind == DesignKind::Scts) {
                double u = sampler.next_uniform();
                tau_tilde = current.tau_hat + (2.0 * u - 1.0) * beta * current.sigma_hat;
                action = tau_tilde >= 0.0 ? 1 : 0;
            } else {
                action = current.tau_hat + beta * current.sigma_hat >= 0.0 ? 1 : 0;
            }
            result.fits.push_back({current.tau_hat, current.sigma_hat, tau_tilde, beta});
        } else if (config.kind == DesignKind::Fixed) {
            action = 1;
        } else {
            action = sampler.next_coin();
        }

        observe(t_obs, action);
        if (action == 1) result.treated_epochs.push_back(step);

        if (needs_fit) {
            // Elliptical potential audit against frozen design rows: the new
            // epoch's context under the decomposition that includes it.
            int t_new = t_obs + 1;
            const Eigen::MatrixXd& u_new = trace->u(t_new);
            Eigen::VectorXd z_new =
                u_new.transpose() * result.panel.donor_obs.col(t_obs) / root_n;
            Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
            x(0) = action;
            x.segment(1, z_new.size()) = z_new;
            Eigen::LLT<Eigen::MatrixXd> llt(omega_bar);
            result.ell_sum += std::sqrt(x.dot(llt.solve(x)));
            result.ell_B = std::max(result.ell_B, x.norm());
            omega_bar += x * x.transpose();
        }
    }

    if (trace) {
        result.final_fit = fit_at(e);
    } else {
        LatentEstimate latent;
        result.final_fit = fit_on_panel(result.panel, latent, config.rank, config.rho);
    }
    result.regret = compute_regret(tau_star, std::vector<int>(result.panel.actions.begin() + t0,
                                                             result.panel.actions.end()));
    return result;
}

namespace {

using nlohmann::json;

json vector_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Eigen::VectorXd vector_from_json(const json& a) {
    Eigen::VectorXd v(a.size());
    for (size_t i = 0; i < a.size(); ++i) v(i) = a[i].is_null() ? kNaN : a[i].get<double>();
    return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
    if (rows.empty()) return Eigen::MatrixXd(0, 0);
    Eigen::MatrixXd m(rows.size(), rows[0].size());
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != static_cast<size_t>(m.cols()))
            throw DataError("ragged matrix in JSON");
        for (size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j].get<double>();
    }
    return m;
}

double number_or_nan(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

json beta_to_json(const BetaSchedule& b) {
    return json{{"sigma", b.sigma},
                {"B", b.B},
                {"r", b.r},
                {"n", b.n},
                {"T", b.T},
                {"lambda_norm_plus_tau", b.lambda_norm_plus_tau},
                {"mode", b.mode == BetaSchedule::Mode::Theoretical ? "theoretical" : "scaled"},
                {"scale", b.scale}};
}

BetaSchedule beta_from_json(const json& j) {
    BetaSchedule b;
    b.sigma = j.at("sigma").get<double>();
    b.B = j.at("B").get<double>();
    b.r = j.at("r").get<int>();
    b.n = j.at("n").get<int>();
    b.T = j.at("T").get<int>();
    b.lambda_norm_plus_tau = j.at("lambda_norm_plus_tau").get<double>();
    std::string mode = j.at("mode").get<std::string>();
    if (mode == "theoretical") b.mode = BetaSchedule::Mode::Theoretical;
    else if (mode == "scaled") b.mode = BetaSchedule::Mode::Scaled;
    else throw DataError("unknown beta mode: " + mode);
    b.scale = j.at("scale").get<double>();
    return b;
}

}  // namespace

std::string to_json_string(const ExperimentResult& r) {
    json fits = {{"tau_hat", json::array()},
                 {"sigma_hat", json::array()},
                 {"tau_tilde", json::array()},
                 {"beta", json::array()}};
    for (const EpochFit& f : r.fits) {
        fits["tau_hat"].push_back(f.tau_hat);
        fits["sigma_hat"].push_back(f.sigma_hat);
        fits["tau_tilde"].push_back(f.tau_tilde);
        fits["beta"].push_back(f.beta);
    }
    json j{{"schema_version", 1},
           {"design", design_kind_name(r.config.kind)},
           {"config",
            {{"rank", r.config.rank},
             {"rho", r.config.rho},
             {"refresh_every", r.config.refresh_every},
             {"sampler_seed", r.config.sampler_seed},
             {"beta", beta_to_json(r.config.beta)}}},
           {"pre_treatment", r.panel.pre_treatment},
           {"actions", r.panel.actions},
           {"unit_obs", vector_to_json(r.panel.unit_obs)},
           {"donor_obs", matrix_to_json(r.panel.donor_obs)},
           {"tau_star", r.tau_star},
           {"seeds", {{"noise", r.noise_seed}, {"sampler", r.config.sampler_seed}}},
           {"regret",
            {{"per_epoch", r.regret.per_epoch},
             {"total", r.regret.total},
             {"suboptimal_count", r.regret.suboptimal_count}}},
           {"fits", std::move(fits)},
           {"M", r.treated_epochs},
           {"final_fit",
            {{"tau_hat", r.final_fit.tau_hat},
             {"sigma_hat", r.final_fit.sigma_hat},
             {"lambda_hat", vector_to_json(r.final_fit.lambda_hat)},
             {"rho", r.final_fit.rho}}},
           {"elliptical", {{"sum", r.ell_sum}, {"B", r.ell_B}}}};
    return j.dump();
}

ExperimentResult experiment_result_from_json(const std::string& text) {
    try {
        json j = json::parse(text);
        ExperimentResult r;
        r.config.kind = parse_design_kind(j.at("design").get<std::string>());
        const json& cfg = j.at("config");
        r.config.rank = cfg.at("rank").get<int>();
        r.config.rho = cfg.at("rho").get<double>();
        r.config.refresh_every = cfg.at("refresh_every").get<int>();
        r.config.sampler_seed = cfg.at("sampler_seed").get<uint64_t>();
        r.config.beta = beta_from_json(cfg.at("beta"));
        r.panel.pre_treatment = j.at("pre_treatment").get<int>();
        r.panel.actions = j.at("actions").get<std::vector<int>>();
        r.panel.unit_obs = vector_from_json(j.at("unit_obs"));
        r.panel.donor_obs = matrix_from_json(j.at("donor_obs"));
        if (r.panel.donor_obs.cols() != r.panel.epochs())
            throw DataError("donor panel does not match the action history");
        r.tau_star = number_or_nan(j.at("tau_star"));
        r.noise_seed = j.at("seeds").at("noise").get<uint64_t>();
        const json& reg = j.at("regret");
        r.regret.per_epoch = reg.at("per_epoch").get<std::vector<double>>();
        r.regret.total = reg.at("total").get<double>();
        r.regret.suboptimal_count = reg.at("suboptimal_count").get<int>();
        const json& fits = j.at("fits");
        size_t m = fits.at("tau_hat").size();
        for (size_t i = 0; i < m; ++i) {
            EpochFit f;
            f.tau_hat = fits.at("tau_hat")[i].get<double>();
            f.sigma_hat = fits.at("sigma_hat")[i].get<double>();
            f.tau_tilde = number_or_nan(fits.at("tau_tilde")[i]);
            f.beta = fits.at("beta")[i].get<double>();
            r.fits.push_back(f);
        }
        r.treated_epochs = j.at("M").get<std::vector<int>>();
        const json& ff = j.at("final_fit");
        r.final_fit.tau_hat = ff.at("tau_hat").get<double>();
        r.final_fit.sigma_hat = ff.at("sigma_hat").get<double>();
        r.final_fit.lambda_hat = vector_from_json(ff.at("lambda_hat"));
        r.final_fit.rho = ff.at("rho").get<double>();
        r.ell_sum = j.at("elliptical").at("sum").get<double>();
        r.ell_B = j.at("elliptical").at("B").get<double>();
        r.panel.validate();
        return r;
    } catch (const json::exception& e) {
        throw DataError(std::string("bad experiment result JSON: ") + e.what());
    }
}

}  // namespace scts
