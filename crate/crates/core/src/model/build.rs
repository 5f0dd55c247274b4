use std::collections::BTreeMap;

use rayon::prelude::*;

use super::config::{binary_prior, IncidentConfig, LoadingCondition, ModelConfig};
use super::nodes::*;
use super::physics;
use super::ship::ShipParticulars;
use super::states::{detection_tables, ihb_table, DamageStateSpec};
use super::{MissingInput, ModelError};
use crate::bn::{ConditionalTable, DiscreteNode, Network};
use crate::discretize::{
    functional_cpt, prior_table, Binning, BinningPolicy, Distribution, NoiseModel, NoiseSelector, ParentAxis,
    SynthesisConfig,
};

/// Tail mass left outside the range of a reported node.
const REPORTED_TAIL: f64 = 3e-5;
/// Multiplicative head-room of a reported node above its latent range.
const REPORTED_CEILING: f64 = 1.5;
/// Upper bound on the bins of a reported node.
const MAX_REPORTED_BINS: usize = 400;
/// Relative half-width of the band holding a known damaged displacement.
const KNOWN_MASS_BAND: f64 = 1e-6;

const YES_NO: [&str; 2] = ["yes", "no"];
const GOOD_POOR: [&str; 2] = ["good", "poor"];
const LOADING: [&str; 2] = ["loaded", "ballast"];
const WATER_INGRESS: [&str; 2] = ["ballast_tank", "cargo_tank"];

/// A compiled-ready network together with the discretization it was built on.
#[derive(Debug, Clone)]
pub struct GroundingModel {
    network: Network,
    spec: DamageStateSpec,
    warnings: Vec<String>,
}

impl GroundingModel {
    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn into_network(self) -> Network {
        self.network
    }

    pub fn spec(&self) -> &DamageStateSpec {
        &self.spec
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Bins of a continuous node; `None` for categorical or unknown nodes.
    pub fn binning(&self, id: &str) -> Option<Binning> {
        self.network.node(id)?.edges().and_then(|e| Binning::new(e).ok())
    }
}

type Job = Box<dyn FnOnce() -> Result<ConditionalTable, ModelError> + Send>;

struct Plan<'a> {
    model: &'a ModelConfig,
    nodes: Vec<DiscreteNode>,
    jobs: Vec<Job>,
    bins: BTreeMap<&'static str, Binning>,
}

impl<'a> Plan<'a> {
    fn resolve(&self, id: &str, default: BinningPolicy) -> Result<Binning, ModelError> {
        let policy = self.model.binning.get(id).cloned().unwrap_or(default);
        Ok(policy.resolve()?)
    }

    fn count(&self, id: &str, lo: f64, hi: f64) -> Result<Binning, ModelError> {
        self.resolve(
            id,
            BinningPolicy::Count {
                lo,
                hi,
                count: self.model.default_bins,
            },
        )
    }

    fn bins(&self, id: &str) -> Binning {
        self.bins[id].clone()
    }

    fn add_continuous(&mut self, id: &'static str, bins: Binning, parents: &[&str], unit: &str, job: Job) {
        self.nodes
            .push(DiscreteNode::new(id, bins.states(), parents).with_unit(unit));
        self.bins.insert(id, bins);
        self.jobs.push(job);
    }

    fn add_labeled(&mut self, id: &'static str, labels: &[&str], parents: &[&str], job: Job) {
        self.nodes.push(DiscreteNode::labeled(id, labels, parents));
        self.jobs.push(job);
    }

    fn add_prior(&mut self, id: &'static str, bins: Binning, dist: Distribution, unit: &str) {
        let b = bins.clone();
        self.add_continuous(
            id,
            bins,
            &[],
            unit,
            Box::new(move || Ok(ConditionalTable::new(id, prior_table(&dist, &b, true)?))),
        );
    }

    /// Adds `id = f(parents) ∘ noise` with the given child bins.
    #[allow(clippy::too_many_arguments)]
    fn add_functional<F>(
        &mut self,
        id: &'static str,
        bins: Binning,
        parents: &[&str],
        unit: &str,
        axes: Vec<ParentAxis>,
        aux: Vec<Distribution>,
        noise: NoiseSelector,
        f: F,
    ) where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        let b = bins.clone();
        let cfg: SynthesisConfig = self.model.synthesis;
        self.add_continuous(
            id,
            bins,
            parents,
            unit,
            Box::new(move || Ok(functional_cpt(id, &b, &axes, &aux, &noise, f, &cfg)?)),
        );
    }

    /// Adds a measurement `id` of the continuous node `latent`, optionally
    /// with a categorical quality parent selecting between two error laws.
    fn add_reported(
        &mut self,
        id: &'static str,
        latent: &'static str,
        multiplicative: bool,
        laws: &[&Distribution],
        quality: Option<&'static str>,
    ) -> Result<(), ModelError> {
        let latent_bins = self.bins(latent);
        let widest = laws
            .iter()
            .max_by(|a, b| a.sd().total_cmp(&b.sd()))
            .copied()
            .expect("at least one error law");
        let bins = match self.model.binning.get(id) {
            Some(p) => p.resolve()?,
            None => reported_bins(&latent_bins, widest, laws, multiplicative)?,
        };
        let models: Vec<NoiseModel> = laws
            .iter()
            .map(|&d| {
                if multiplicative {
                    NoiseModel::multiplicative(d.clone())
                } else {
                    Ok(NoiseModel::additive(d.clone()))
                }
            })
            .collect::<Result<_, _>>()?;
        let mut axes = vec![ParentAxis::Interval(latent_bins)];
        let mut parents = vec![latent];
        let noise = match quality {
            Some(q) => {
                axes.push(ParentAxis::Categorical(2));
                parents.push(q);
                NoiseSelector::ByParent { parent: 1, models }
            }
            None => NoiseSelector::Fixed(models.into_iter().next().expect("one law")),
        };
        let unit = self
            .nodes
            .iter()
            .find(|n| n.id == latent)
            .and_then(|n| n.unit.clone())
            .unwrap_or_default();
        self.add_functional(id, bins, &parents, &unit, axes, vec![], noise, |v| v[0]);
        Ok(())
    }
}

fn reported_bins(
    latent: &Binning,
    widest: &Distribution,
    laws: &[&Distribution],
    multiplicative: bool,
) -> Result<Binning, ModelError> {
    let latent_width = latent
        .edges()
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let (lo, hi, width) = if multiplicative {
        let down = widest.quantile(REPORTED_TAIL);
        let up = widest.quantile(1.0 - REPORTED_TAIL).min(REPORTED_CEILING);
        let lo = if latent.lo() > 0.0 { latent.lo() * down } else { latent.lo() };
        (lo, latent.hi() * up, 0.5 * latent_width)
    } else {
        let sd_max = widest.sd();
        let sd_min = laws.iter().map(|d| d.sd()).fold(f64::INFINITY, f64::min);
        let margin = 4.0 * sd_max;
        (latent.lo() - margin, latent.hi() + margin, 0.5 * latent_width.min(sd_min))
    };
    let count = (((hi - lo) / width).ceil() as usize).clamp(2, MAX_REPORTED_BINS);
    Ok(Binning::uniform(lo, hi, count)?)
}

fn require(missing: &mut Vec<MissingInput>, module: &str, input: &str, value: Option<f64>) -> f64 {
    match value {
        Some(v) => v,
        None => {
            missing.push(MissingInput {
                module: module.into(),
                input: input.into(),
            });
            f64::NAN
        }
    }
}

fn check_incident(ship: &ShipParticulars, incident: &IncidentConfig) -> Result<(), ModelError> {
    let invalid = |m: String| Err(ModelError::InvalidIncident(m));
    if let Some(l) = incident.tank_damaged_length_m {
        if !(l > 0.0 && l <= ship.length_m) {
            return invalid(format!("tank damaged length {l} m must lie in (0, L]"));
        }
    }
    if !(incident.tank_damaged_length_sd_m >= 0.0) {
        return invalid("tank damaged length sd must be non-negative".into());
    }
    if let Some(h) = incident.oil_level_m {
        if !(h >= 0.0 && h <= ship.depth_m) {
            return invalid(format!("oil level {h} m must lie in [0, D]"));
        }
    }
    if let Some(h) = incident.pressure_head_m {
        if !(h >= 0.0) || !h.is_finite() {
            return invalid(format!("pressure head {h} m must be non-negative"));
        }
    }
    if let Some(gm) = incident.metacentric_height_m {
        if !(gm > 0.0) || !gm.is_finite() {
            return invalid(format!("metacentric height {gm} m must be positive"));
        }
    }
    if let Some(m) = incident.damaged_displacement_t {
        if !(m > 0.0) || !m.is_finite() {
            return invalid(format!("damaged displacement {m} t must be positive"));
        }
    }
    if !(incident.ground_reaction_max() > 0.0) {
        return invalid("ground reaction bound must be positive".into());
    }
    if let Some([lo, hi]) = incident.port_draft_range_m {
        if !(lo >= 0.0 && hi > lo && hi <= ship.depth_m) {
            return invalid(format!("port draft range [{lo}, {hi}] must be ascending within [0, D]"));
        }
    }
    for (id, d) in &incident.priors {
        if ![M, V, L_D, R, Y_D, H, T_P].contains(&id.as_str()) {
            return invalid(format!("no prior can be set on node {id}"));
        }
        d.validate()
            .map_err(|e| ModelError::InvalidIncident(format!("prior of {id}: {e}")))?;
    }
    Ok(())
}

/// Assembles the grounding network for the enabled modules.
///
/// Every conditional table is synthesized from the physics relations and
/// error laws of `model`; distinct tables are synthesized concurrently.
pub fn build_network(
    ship: &ShipParticulars,
    model: &ModelConfig,
    incident: &IncidentConfig,
    spec: &DamageStateSpec,
) -> Result<GroundingModel, ModelError> {
    ship.validate()?;
    model.validate()?;
    check_incident(ship, incident)?;

    let mods = model.modules;
    let double = ship.is_double_hull();
    let has_ihb = double && (mods.crashworthiness || mods.hydraulic);
    let has_dv = has_ihb || mods.hydrostatic || mods.inspection;
    let has_yd = mods.hydrostatic || mods.inspection;

    let mut missing = Vec::new();
    let mut tank_length = f64::NAN;
    let mut head_water = f64::NAN;
    let mut oil_level = f64::NAN;
    if mods.hydraulic {
        tank_length = require(&mut missing, "hydraulic", "tank_damaged_length_m", incident.tank_damaged_length_m);
        head_water = require(&mut missing, "hydraulic", "pressure_head_m", incident.pressure_head_m);
        if incident.loading_condition != Some(LoadingCondition::Ballast) {
            oil_level = require(&mut missing, "hydraulic", "oil_level_m", incident.oil_level_m);
        }
    }
    let mut gm = f64::NAN;
    let mut damaged_mass = f64::NAN;
    if mods.hydrostatic {
        gm = require(&mut missing, "hydrostatic", "metacentric_height_m", incident.metacentric_height_m);
        damaged_mass = require(&mut missing, "hydrostatic", "damaged_displacement_t", incident.damaged_displacement_t);
    }
    if !missing.is_empty() {
        return Err(ModelError::ConfigurationIncomplete(missing));
    }

    let mut warnings = Vec::new();
    let prior_of = |id: &str, default: Distribution| incident.priors.get(id).cloned().unwrap_or(default);
    let mut plan = Plan {
        model,
        nodes: Vec::new(),
        jobs: Vec::new(),
        bins: BTreeMap::new(),
    };
    let errs = &model.errors;
    let breadth = ship.breadth_m;

    // damage descriptors that other modules hang off
    if has_ihb {
        plan.add_labeled(
            IHB,
            &YES_NO,
            &[D_V],
            {
                let table = ihb_table(spec)?;
                Box::new(move || Ok(table))
            },
        );
    }

    // crashworthiness
    if mods.crashworthiness {
        let [m_lo, m_hi] = ship.displacement_range_t;
        let m_bins = plan.count(M, m_lo, m_hi)?;
        plan.add_prior(M, m_bins, prior_of(M, Distribution::uniform(m_lo, m_hi)?), "t");
        plan.add_reported(M_R, M, true, &[&errs.displacement], None)?;

        let vs = ship.service_speed_kn;
        let v_bins = plan.count(V, 0.0, vs)?;
        let [a, b] = model.speed_prior_shape;
        plan.add_prior(V, v_bins, prior_of(V, Distribution::scaled_beta(a, b, 0.0, vs)?), "kn");
        plan.add_reported(V_R, V, false, &[&errs.speed], None)?;

        let l = ship.length_m;
        let l_bins = plan.count(L_D, 0.0, l)?;
        let l_prior = Distribution::trunc_exp_with_mean(0.0, l, model.damage_length_mean_fraction * l)?;
        plan.add_prior(L_D, l_bins, prior_of(L_D, l_prior), "m");
        plan.add_reported(L_D_R, L_D, false, &[&errs.damage_length], None)?;

        let added = model.added_mass_fraction;
        let e_max = physics::kinetic_energy(m_hi, vs, added);
        let e_bins = plan.count(E, 0.0, e_max)?;
        let axes = vec![ParentAxis::Interval(plan.bins(M)), ParentAxis::Interval(plan.bins(V))];
        plan.add_functional(E, e_bins, &[M, V], "J", axes, vec![], NoiseModel::none().into(), move |v| {
            physics::kinetic_energy(v[0], v[1], added)
        });

        let f_max = physics::tearing_force(spec.width.hi(), &ship.layers(true));
        let f_bins = plan.count(F_H, 0.0, f_max)?;
        let axes = vec![ParentAxis::Interval(plan.bins(E)), ParentAxis::Interval(plan.bins(L_D))];
        let noise = NoiseModel::multiplicative(errs.grounding_force.clone())?;
        plan.add_functional(F_H, f_bins, &[E, L_D], "N", axes, vec![], noise.into(), |v| v[0] / v[1]);

        let outer = physics::layer_resistance(&ship.outer_bottom);
        let both: f64 = ship.layers(true).iter().map(|l| physics::layer_resistance(l)).sum();
        if has_ihb {
            let axes = vec![ParentAxis::Interval(plan.bins(F_H)), ParentAxis::Categorical(2)];
            plan.add_functional(
                D_T,
                spec.width.clone(),
                &[F_H, IHB],
                "m",
                axes,
                vec![],
                NoiseModel::none().into(),
                move |v| physics::width_from_resistance(v[0], if v[1] == 0.0 { both } else { outer }),
            );
        } else {
            let axes = vec![ParentAxis::Interval(plan.bins(F_H))];
            plan.add_functional(D_T, spec.width.clone(), &[F_H], "m", axes, vec![], NoiseModel::none().into(), move |v| {
                physics::width_from_resistance(v[0], outer)
            });
        }
    } else {
        plan.add_prior(D_T, spec.width.clone(), Distribution::uniform(0.0, spec.width.hi())?, "m");
    }

    // hydrostatics and bathymetry
    if has_yd {
        let half = 0.5 * breadth;
        let prior = prior_of(Y_D, Distribution::uniform(spec.location.lo(), spec.location.hi())?);
        if prior.support().0 < -half || prior.support().1 > half {
            warnings.push(format!("Y_D prior extends beyond ±{half} m and is truncated"));
        }
        plan.add_prior(Y_D, spec.location.clone(), prior, "m");
    }
    if mods.hydrostatic {
        let uncertain = incident.damaged_displacement_uncertain;
        let m_bins = if uncertain {
            let lo = damaged_mass * errs.displacement.quantile(1e-4);
            let hi = damaged_mass * errs.displacement.quantile(1.0 - 1e-4);
            plan.count(M_DAMAGED, lo, hi)?
        } else {
            Binning::uniform(damaged_mass * (1.0 - KNOWN_MASS_BAND), damaged_mass * (1.0 + KNOWN_MASS_BAND), 2)?
        };
        let m_prior = if uncertain {
            Distribution::lognormal_median_cov(damaged_mass, errs.displacement.sd())?
        } else {
            Distribution::uniform(m_bins.lo(), m_bins.hi())?
        };
        let m_lo = m_bins.lo();
        plan.add_prior(M_DAMAGED, m_bins, m_prior, "t");

        let r_hi = incident.ground_reaction_max();
        if r_hi >= m_lo {
            return Err(ModelError::GroundReactionExceedsWeight {
                reaction_t: r_hi,
                mass_t: m_lo,
            });
        }
        let r_bins = plan.count(R, 0.0, r_hi)?;
        plan.add_prior(R, r_bins, prior_of(R, Distribution::uniform(0.0, r_hi)?), "t");
        plan.add_reported(R_C, R, true, &[&errs.ground_reaction], None)?;

        let [t_lo, t_hi] = incident
            .port_draft_range_m
            .unwrap_or([0.25 * ship.depth_m, 0.9 * ship.depth_m]);
        let tp_bins = plan.count(T_P, t_lo, t_hi)?;
        plan.add_prior(T_P, tp_bins, prior_of(T_P, Distribution::uniform(t_lo, t_hi)?), "m");
        plan.add_reported(T_P_M, T_P, false, &[&errs.port_draft], None)?;

        let tan_moment = r_hi * 0.5 * breadth / ((m_lo - r_hi) * gm);
        let tan_draft = (t_hi - t_lo) / breadth;
        let phi_max = tan_moment.min(tan_draft).atan().to_degrees();
        let phi_bins = plan.resolve(
            HEEL,
            BinningPolicy::Count {
                lo: -phi_max,
                hi: phi_max,
                count: model.heel_bins,
            },
        )?;
        let axes = vec![
            ParentAxis::Interval(plan.bins(M_DAMAGED)),
            ParentAxis::Interval(plan.bins(R)),
            ParentAxis::Interval(plan.bins(Y_D)),
        ];
        plan.add_functional(
            HEEL,
            phi_bins,
            &[M_DAMAGED, R, Y_D],
            "deg",
            axes,
            vec![],
            NoiseModel::none().into(),
            move |v| {
                physics::heel_tangent(v[1], v[0], gm, v[2])
                    .map(|t| t.atan().to_degrees())
                    .unwrap_or(f64::NAN)
            },
        );

        let ts_bins = plan.count(T_S, t_lo, t_hi)?;
        let axes = vec![ParentAxis::Interval(plan.bins(HEEL)), ParentAxis::Interval(plan.bins(T_P))];
        plan.add_functional(T_S, ts_bins, &[HEEL, T_P], "m", axes, vec![], NoiseModel::none().into(), move |v| {
            physics::starboard_draft(v[1], v[0].to_radians().tan(), breadth)
        });
        plan.add_reported(T_S_M, T_S, false, &[&errs.starboard_draft], None)?;

        let td_bins = plan.count(T_D, t_lo, t_hi)?;
        let axes = vec![
            ParentAxis::Interval(plan.bins(Y_D)),
            ParentAxis::Interval(plan.bins(T_P)),
            ParentAxis::Interval(plan.bins(T_S)),
        ];
        plan.add_functional(T_D, td_bins, &[Y_D, T_P, T_S], "m", axes, vec![], NoiseModel::none().into(), move |v| {
            physics::rock_draft(v[1], v[2], v[0], breadth)
        });

        let h_hi = ship.max_draft_m;
        let h_bins = plan.count(H, 0.0, h_hi)?;
        plan.add_prior(H, h_bins, prior_of(H, Distribution::uniform(0.0, h_hi)?), "m");
        plan.add_reported(H_R, H, false, &[&errs.water_depth], None)?;

        let axes = vec![ParentAxis::Interval(plan.bins(T_D)), ParentAxis::Interval(plan.bins(H))];
        plan.add_functional(D_V, spec.vertical.clone(), &[T_D, H], "m", axes, vec![], NoiseModel::none().into(), |v| {
            physics::penetration(v[0], v[1])
        });
    } else if has_dv {
        let dist = Distribution::uniform(spec.vertical.lo(), spec.vertical.hi())?;
        plan.add_prior(D_V, spec.vertical.clone(), dist, "m");
    }

    // hydraulics
    if mods.hydraulic {
        let lc_prior = match incident.loading_condition {
            Some(LoadingCondition::Loaded) => vec![1.0, 0.0],
            Some(LoadingCondition::Ballast) => vec![0.0, 1.0],
            None => binary_prior(incident.loading_prior, "loading condition")?,
        };
        plan.add_labeled(LC, &LOADING, &[], Box::new(move || Ok(ConditionalTable::new(LC, lc_prior))));
        if has_ihb {
            let (wi, os) = detection_tables();
            plan.add_labeled(WI, &WATER_INGRESS, &[IHB, LC], Box::new(move || Ok(wi)));
            plan.add_labeled(OS, &YES_NO, &[IHB, LC], Box::new(move || Ok(os)));
        }

        let g = model.gravity;
        let (rho_w, rho_o) = (model.seawater_density, model.oil_density);
        let density_ratio = rho_w / rho_o;
        let oil_head = if oil_level.is_nan() { 0.0 } else { oil_level - density_ratio * head_water };
        let cd = model.discharge_coefficient.clone();
        let length_sd = incident.tank_damaged_length_sd_m;
        let max_head = head_water.max(oil_head);
        let positive_heads: Vec<f64> = [head_water, oil_head].into_iter().filter(|h| *h > 0.0).collect();
        let min_head = positive_heads.iter().copied().fold(f64::INFINITY, f64::min);
        let q_hi = cd.quantile(1.0 - 1e-6)
            * (tank_length + 5.0 * length_sd)
            * spec.width.hi()
            * (2.0 * g * max_head.max(0.0)).sqrt();
        let q_bins = if q_hi > 0.0 {
            let slope = cd.mean() * tank_length * (2.0 * g * min_head).sqrt();
            let count = ((2.0 * q_hi / slope).ceil() as usize).clamp(model.default_bins, model.max_flow_bins);
            plan.resolve(Q, BinningPolicy::Count { lo: 0.0, hi: q_hi, count })?
        } else {
            warnings.push("no positive pressure head: flow rates carry no information".into());
            plan.resolve(Q, BinningPolicy::Count { lo: 0.0, hi: 1.0, count: 2 })?
        };

        let mut aux = vec![cd];
        if length_sd > 0.0 {
            aux.push(Distribution::normal(tank_length, length_sd)?);
        }
        // regime: 0 sea-water inflow, 1 oil outflow
        let flow = move |regime: u8, d_t: f64, c_d: f64, length: f64| -> f64 {
            let length = length.max(0.0);
            if regime == 1 {
                physics::oil_outflow_rate(c_d, length, d_t, oil_level, head_water, rho_w, rho_o, g).rate
            } else {
                physics::flooding_rate(c_d, length, d_t, head_water, g)
            }
        };
        let n_aux = aux.len();
        if has_ihb {
            let axes = vec![
                ParentAxis::Interval(spec.width.clone()),
                ParentAxis::Categorical(2),
                ParentAxis::Categorical(2),
            ];
            plan.add_functional(Q, q_bins, &[D_T, IHB, LC], "m3/s", axes, aux, NoiseModel::none().into(), move |v| {
                let oil = v[1] == 0.0 && v[2] == 0.0;
                let length = if n_aux > 1 { v[4] } else { tank_length };
                flow(u8::from(oil), v[0], v[3], length)
            });
        } else {
            let axes = vec![ParentAxis::Interval(spec.width.clone()), ParentAxis::Categorical(2)];
            plan.add_functional(Q, q_bins, &[D_T, LC], "m3/s", axes, aux, NoiseModel::none().into(), move |v| {
                let oil = v[1] == 0.0;
                let length = if n_aux > 1 { v[3] } else { tank_length };
                flow(u8::from(oil), v[0], v[2], length)
            });
        }

        let q_prior = binary_prior(incident.flow_quality_prior, "flow quality")?;
        plan.add_labeled(Q_EPS, &GOOD_POOR, &[], Box::new(move || Ok(ConditionalTable::new(Q_EPS, q_prior))));
        plan.add_reported(Q_M, Q, true, &[&errs.flow_good, &errs.flow_poor], Some(Q_EPS))?;
    }

    // inspection
    if mods.inspection {
        let vis_prior = binary_prior(incident.visibility_prior, "visibility")?;
        plan.add_labeled(VIS, &GOOD_POOR, &[], Box::new(move || Ok(ConditionalTable::new(VIS, vis_prior))));
        let extent = [&errs.inspection_extent_good, &errs.inspection_extent_poor];
        plan.add_reported(Z_T, D_T, true, &extent, Some(VIS))?;
        plan.add_reported(Z_V, D_V, true, &extent, Some(VIS))?;
        let location = [&errs.inspection_location_good, &errs.inspection_location_poor];
        plan.add_reported(Z_Y, Y_D, false, &location, Some(VIS))?;
    }

    let Plan { nodes, jobs, .. } = plan;
    let tables: Vec<ConditionalTable> = jobs
        .into_par_iter()
        .map(|job| job())
        .collect::<Result<_, _>>()?;
    let network = Network::new(nodes, tables)?;
    Ok(GroundingModel {
        network,
        spec: spec.clone(),
        warnings,
    })
}
