//! IaaS cloud model: instance types, leased VMs, billing, data transfer and
//! the linear utilization-based power model.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Joules per kilowatt-hour.
const J_PER_KWH: f64 = 3.6e6;

/// Guard against float noise at exact billing-period boundaries.
const CEIL_EPS: f64 = 1e-9;

/// One VM instance type from the provider catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceType {
    pub name: String,
    /// Processing performance in millions of instructions per second.
    pub mips: f64,
    /// Price of one billing period.
    pub cost_per_period: f64,
    /// Power draw at 0% utilization, watts.
    pub power_idle_w: f64,
    /// Power draw at 100% utilization, watts.
    pub power_max_w: f64,
}

impl InstanceType {
    /// Power draw at the given utilization, linear between idle and max.
    pub fn power_w(&self, utilization: f64) -> f64 {
        assert!(
            (0.0..=1.0).contains(&utilization),
            "utilization {utilization} outside [0, 1]"
        );
        self.power_idle_w + (self.power_max_w - self.power_idle_w) * utilization
    }
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("catalog must contain at least one instance type")]
    Empty,
    #[error("instance types must be strictly increasing in mips and cost: `{prev}` vs `{next}`")]
    NotOrdered { prev: String, next: String },
    #[error("instance type `{name}` has invalid parameters: {reason}")]
    InvalidType { name: String, reason: String },
    #[error("catalog csv line {line}: {reason}")]
    Csv { line: usize, reason: String },
}

/// Ordered set of instance types plus the data-center wide constants.
///
/// Types are kept sorted so that both mips and cost strictly increase with
/// the index; catalogs where a cheaper type is faster are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceCatalog {
    types: Vec<InstanceType>,
    /// Uniform inter-VM bandwidth in MB/s.
    pub bandwidth_mbps: f64,
    /// Billing period length in seconds.
    pub billing_period_s: f64,
    /// Lead time between requesting a VM and it becoming usable.
    pub provisioning_delay_s: f64,
}

impl InstanceCatalog {
    pub fn new(
        types: Vec<InstanceType>,
        bandwidth_mbps: f64,
        billing_period_s: f64,
        provisioning_delay_s: f64,
    ) -> Result<Self, CatalogError> {
        if types.is_empty() {
            return Err(CatalogError::Empty);
        }
        // Negated comparisons reject NaN parameters along with non-positives.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        for t in &types {
            let bad = |reason: &str| CatalogError::InvalidType {
                name: t.name.clone(),
                reason: reason.to_string(),
            };
            if !(t.mips > 0.0) {
                return Err(bad("mips must be positive"));
            }
            if !(t.cost_per_period > 0.0) {
                return Err(bad("cost per period must be positive"));
            }
            if !(t.power_max_w > t.power_idle_w && t.power_idle_w > 0.0) {
                return Err(bad("requires power_max_w > power_idle_w > 0"));
            }
        }
        for w in types.windows(2) {
            if !(w[1].mips > w[0].mips && w[1].cost_per_period > w[0].cost_per_period) {
                return Err(CatalogError::NotOrdered {
                    prev: w[0].name.clone(),
                    next: w[1].name.clone(),
                });
            }
        }
        Ok(Self {
            types,
            bandwidth_mbps,
            billing_period_s,
            provisioning_delay_s,
        })
    }

    /// The ten m3/m4/m5 types of the us-east catalog with their measured
    /// idle/max power draws; 20 MB/s links, hourly billing, 100 s VM startup.
    pub fn default_catalog() -> Self {
        let types = [
            ("m3.medium", 1.0, 0.067, 140.0, 228.0),
            ("m4.large", 2.0, 0.10, 146.0, 238.0),
            ("m4.xlarge", 4.0, 0.20, 153.0, 249.0),
            ("m4.2xlarge", 8.0, 0.40, 159.0, 260.0),
            ("m4.4xlarge", 16.0, 0.80, 167.0, 272.0),
            ("m5.8xlarge", 32.0, 1.536, 174.0, 282.0),
            ("m4.10xlarge", 40.0, 2.00, 182.0, 294.0),
            ("m5.12xlarge", 48.0, 2.304, 188.0, 305.0),
            ("m4.16xlarge", 64.0, 3.20, 196.0, 316.0),
            ("m5.24xlarge", 96.0, 4.608, 204.0, 330.0),
        ]
        .iter()
        .map(|&(name, mips, cost, pmin, pmax)| InstanceType {
            name: name.to_string(),
            mips,
            cost_per_period: cost,
            power_idle_w: pmin,
            power_max_w: pmax,
        })
        .collect();
        Self::new(types, 20.0, 3600.0, 100.0).expect("default catalog is well formed")
    }

    /// Parses `name,vcpu,cost_per_hour,power_min_w,power_max_w` rows, the
    /// vCPU count doubling as the MIPS rating. Data-center constants keep
    /// the defaults of [`InstanceCatalog::default_catalog`].
    pub fn from_csv(text: &str) -> Result<Self, CatalogError> {
        const HEADER: [&str; 5] = [
            "name",
            "vcpu",
            "cost_per_hour",
            "power_min_w",
            "power_max_w",
        ];
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(CatalogError::Csv {
            line: 1,
            reason: "empty file".into(),
        })?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != HEADER {
            return Err(CatalogError::Csv {
                line: 1,
                reason: format!("expected header `{}`", HEADER.join(",")),
            });
        }
        let mut types = Vec::new();
        for (ix, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 5 {
                return Err(CatalogError::Csv {
                    line: ix + 1,
                    reason: format!("expected 5 fields, found {}", fields.len()),
                });
            }
            let num = |s: &str, what: &str| -> Result<f64, CatalogError> {
                s.parse::<f64>().map_err(|_| CatalogError::Csv {
                    line: ix + 1,
                    reason: format!("invalid {what}: `{s}`"),
                })
            };
            types.push(InstanceType {
                name: fields[0].to_string(),
                mips: num(fields[1], "vcpu")?,
                cost_per_period: num(fields[2], "cost_per_hour")?,
                power_idle_w: num(fields[3], "power_min_w")?,
                power_max_w: num(fields[4], "power_max_w")?,
            });
        }
        Self::new(types, 20.0, 3600.0, 100.0)
    }

    pub fn types(&self) -> &[InstanceType] {
        &self.types
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn get(&self, ix: usize) -> &InstanceType {
        &self.types[ix]
    }

    /// Index of the slowest (and cheapest) type.
    pub fn cheapest(&self) -> usize {
        0
    }

    /// Index of the fastest (and most expensive) type.
    pub fn fastest(&self) -> usize {
        self.types.len() - 1
    }
}

/// Execution time of a task of `weight_mi` on the given type.
pub fn et(weight_mi: f64, instance: &InstanceType) -> f64 {
    weight_mi / instance.mips
}

/// Transfer time of `data_mb`; co-located tasks exchange data for free.
pub fn tt(data_mb: f64, same_vm: bool, bandwidth_mbps: f64) -> f64 {
    if same_vm || data_mb == 0.0 {
        0.0
    } else {
        data_mb / bandwidth_mbps
    }
}

/// Billed periods for `runtime_s`: partial periods round up, zero runtime is
/// free.
pub fn billed_periods(runtime_s: f64, billing_period_s: f64) -> u64 {
    if runtime_s <= 0.0 {
        return 0;
    }
    (runtime_s / billing_period_s - CEIL_EPS).ceil().max(1.0) as u64
}

/// Execution cost of one task of the given runtime on `instance`.
pub fn ec(runtime_s: f64, instance: &InstanceType, billing_period_s: f64) -> f64 {
    billed_periods(runtime_s, billing_period_s) as f64 * instance.cost_per_period
}

/// Cost of a set of task runtimes sharing one VM, including the idle slots
/// the VM spent waiting on transfers.
pub fn cumulative_ec(
    task_runtimes_s: &[f64],
    tits_s: f64,
    instance: &InstanceType,
    billing_period_s: f64,
) -> f64 {
    let total: f64 = task_runtimes_s.iter().sum::<f64>() + tits_s;
    ec(total, instance, billing_period_s)
}

/// A busy stretch of a VM timeline running at a fixed utilization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilizationSegment {
    pub start_s: f64,
    pub end_s: f64,
    pub utilization: f64,
}

/// A leased VM with its final utilization timeline.
///
/// The lease opens at the provisioning request, so the startup delay is
/// inside the billed and energy-accounted window. Gaps between segments
/// draw idle power.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VmInstance {
    pub id: usize,
    pub type_ix: usize,
    pub lease_start_s: f64,
    /// First instant the VM can run work (lease start plus startup delay).
    pub available_from_s: f64,
    pub lease_end_s: f64,
    /// Non-overlapping busy segments inside the lease, sorted by start.
    pub segments: Vec<UtilizationSegment>,
}

impl VmInstance {
    pub fn lease_seconds(&self) -> f64 {
        (self.lease_end_s - self.lease_start_s).max(0.0)
    }

    /// Integrates the power draw over the lease: busy segments at their
    /// utilization, everything else at idle power.
    pub fn energy_kwh(&self, catalog: &InstanceCatalog) -> f64 {
        let ty = catalog.get(self.type_ix);
        let lease = self.lease_seconds();
        if lease == 0.0 {
            return 0.0;
        }
        let mut joules = 0.0;
        let mut busy = 0.0;
        for seg in &self.segments {
            let dur = seg.end_s - seg.start_s;
            busy += dur;
            joules += ty.power_w(seg.utilization) * dur;
        }
        joules += ty.power_w(0.0) * (lease - busy).max(0.0);
        joules / J_PER_KWH
    }

    /// Lease cost rounded up to whole billing periods.
    pub fn billing(&self, catalog: &InstanceCatalog) -> f64 {
        ec(
            self.lease_seconds(),
            catalog.get(self.type_ix),
            catalog.billing_period_s,
        )
    }
}
