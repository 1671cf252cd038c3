//! Shared scheduling state: VM timelines with insertion-based placement,
//! provisioning, entry-task duplication and pipeline merge-and-slack.

use crate::cloud::{ec, et, tt, InstanceCatalog, UtilizationSegment, VmInstance};
use crate::workflow::{PipelineGroup, WorkflowDag};

use super::{
    Assignment, DuplicateExec, DuplicationRecord, ProvisionPlan, Schedule, SchedulerOptions,
    SlackMode, SlackRecord,
};

#[derive(Debug, Clone, Copy)]
struct Slot {
    task: usize,
    duplicate: bool,
    start: f64,
    end: f64,
    utilization: f64,
}

#[derive(Debug, Clone)]
struct VmState {
    type_ix: usize,
    /// Provisioning request time; the lease opens here.
    request_s: f64,
    /// request_s plus the provisioning delay (zero for pre-provisioned pools).
    available_s: f64,
    /// Billing starts at first use instead of the request (HEFT pools).
    bill_from_first_use: bool,
    slots: Vec<Slot>,
}

impl VmState {
    fn last_end(&self) -> f64 {
        self.slots.last().map_or(self.available_s, |s| s.end)
    }
}

/// Where a task would land: an existing VM or a freshly provisioned one.
#[derive(Debug, Clone, Copy)]
pub(super) struct Placement {
    pub vm: Option<usize>,
    pub fresh_type_ix: usize,
    pub start: f64,
    pub eft: f64,
}

pub(super) struct SchedState<'a> {
    pub dag: &'a WorkflowDag,
    pub catalog: &'a InstanceCatalog,
    pub plan: ProvisionPlan,
    pub options: SchedulerOptions,
    vms: Vec<VmState>,
    assignments: Vec<Option<Assignment>>,
    duplicates: Vec<DuplicateExec>,
    /// Task -> VM pin established by entry-task duplication.
    pinned: Vec<Option<usize>>,
    /// Tasks fully placed ahead of their dequeue by pipeline slacking.
    premapped: Vec<bool>,
    base_vm_count: usize,
    duplication_vm_count: usize,
    slack_records: Vec<SlackRecord>,
    duplication_records: Vec<DuplicationRecord>,
}

impl<'a> SchedState<'a> {
    pub fn new(
        dag: &'a WorkflowDag,
        catalog: &'a InstanceCatalog,
        plan: ProvisionPlan,
        options: SchedulerOptions,
    ) -> Self {
        let n = dag.task_count();
        Self {
            dag,
            catalog,
            plan,
            options,
            vms: Vec::new(),
            assignments: vec![None; n],
            duplicates: Vec::new(),
            pinned: vec![None; n],
            premapped: vec![false; n],
            base_vm_count: 0,
            duplication_vm_count: 0,
            slack_records: Vec::new(),
            duplication_records: Vec::new(),
        }
    }

    pub fn base_vm_count(&self) -> usize {
        self.base_vm_count
    }

    pub fn is_premapped(&self, task: usize) -> bool {
        self.premapped[task]
    }

    pub fn pinned_vm(&self, task: usize) -> Option<usize> {
        self.pinned[task]
    }

    /// Provisions a VM; `counts_against_cap` distinguishes the regular
    /// fleet from duplication extras.
    pub fn provision(&mut self, type_ix: usize, request_s: f64, counts_against_cap: bool) -> usize {
        let id = self.vms.len();
        self.vms.push(VmState {
            type_ix,
            request_s,
            available_s: request_s + self.catalog.provisioning_delay_s,
            bill_from_first_use: false,
            slots: Vec::new(),
        });
        if counts_against_cap {
            self.base_vm_count += 1;
        } else {
            self.duplication_vm_count += 1;
        }
        id
    }

    /// Adds a pre-provisioned VM that is usable from time zero and billed
    /// from its first task.
    pub fn add_pool_vm(&mut self, type_ix: usize) -> usize {
        let id = self.vms.len();
        self.vms.push(VmState {
            type_ix,
            request_s: 0.0,
            available_s: 0.0,
            bill_from_first_use: true,
            slots: Vec::new(),
        });
        self.base_vm_count += 1;
        id
    }

    /// Earliest time the inputs of `task` are all present on `vm`.
    /// Duplicated parents count through their earliest useful copy; pass
    /// `use_duplicates = false` for the duplication-free counterfactual.
    fn ready_on(&self, task: usize, vm: Option<usize>, use_duplicates: bool) -> f64 {
        let mut ready = 0.0f64;
        for e in self.dag.in_edges(task) {
            let p =
                self.assignments[e.from].expect("parents are placed before children in rank order");
            let same = vm == Some(p.vm);
            let mut arrival = p.aft + tt(e.data_mb, same, self.catalog.bandwidth_mbps);
            if use_duplicates {
                for d in self.duplicates.iter().filter(|d| d.task == e.from) {
                    let same = vm == Some(d.vm);
                    arrival = arrival.min(d.aft + tt(e.data_mb, same, self.catalog.bandwidth_mbps));
                }
            }
            ready = ready.max(arrival);
        }
        ready
    }

    /// Earliest data-ready time on a hypothetical fresh VM.
    pub fn ready_fresh(&self, task: usize, use_duplicates: bool) -> f64 {
        self.ready_on(task, None, use_duplicates)
    }

    /// First insertion slot on `vm` that can hold `duration` seconds not
    /// before `ready`.
    fn earliest_start_on(&self, vm: usize, ready: f64, duration: f64) -> f64 {
        let state = &self.vms[vm];
        let mut candidate = ready.max(state.available_s);
        for slot in &state.slots {
            if candidate + duration <= slot.start {
                return candidate;
            }
            candidate = candidate.max(slot.end);
        }
        candidate
    }

    /// Insertion-based placement probe for `task` on `vm` at utilization 1.
    pub(super) fn probe_existing(&self, task: usize, vm: usize, use_duplicates: bool) -> Placement {
        let ready = self.ready_on(task, Some(vm), use_duplicates);
        let duration = et(
            self.dag.task(task).weight_mi,
            self.catalog.get(self.vms[vm].type_ix),
        );
        let start = self.earliest_start_on(vm, ready, duration);
        Placement {
            vm: Some(vm),
            fresh_type_ix: 0,
            start,
            eft: start + duration,
        }
    }

    /// Best existing VM by earliest finish, optionally restricted by a
    /// per-task sub-deadline. Ties break toward the smaller VM id.
    pub(super) fn best_existing(
        &self,
        task: usize,
        sub_deadline: Option<f64>,
        use_duplicates: bool,
    ) -> Option<Placement> {
        let mut best: Option<Placement> = None;
        for vm in 0..self.vms.len() {
            let p = self.probe_existing(task, vm, use_duplicates);
            if let Some(d) = sub_deadline {
                if p.eft > d + 1e-9 {
                    continue;
                }
            }
            if best.is_none_or(|b| p.eft < b.eft) {
                best = Some(p);
            }
        }
        best
    }

    /// Placement on a hypothetical fresh VM of `type_ix` requested at the
    /// task's data-ready time.
    pub(super) fn probe_fresh(
        &self,
        task: usize,
        type_ix: usize,
        use_duplicates: bool,
    ) -> Placement {
        let ready = self.ready_fresh(task, use_duplicates);
        let start = ready + self.catalog.provisioning_delay_s;
        let duration = et(self.dag.task(task).weight_mi, self.catalog.get(type_ix));
        Placement {
            vm: None,
            fresh_type_ix: type_ix,
            start,
            eft: start + duration,
        }
    }

    /// Commits a placement decision, provisioning when it targets a fresh
    /// VM, and records the assignment.
    pub(super) fn commit(&mut self, task: usize, placement: Placement) -> usize {
        let vm = match placement.vm {
            Some(vm) => vm,
            None => {
                let request = self.ready_fresh(task, true);
                self.provision(placement.fresh_type_ix, request, true)
            }
        };
        let duration = et(
            self.dag.task(task).weight_mi,
            self.catalog.get(self.vms[vm].type_ix),
        );
        debug_assert!((placement.eft - placement.start - duration).abs() < 1e-6);
        self.insert_slot(
            vm,
            Slot {
                task,
                duplicate: false,
                start: placement.start,
                end: placement.start + duration,
                utilization: 1.0,
            },
        );
        self.assignments[task] = Some(Assignment {
            vm,
            ast: placement.start,
            aft: placement.start + duration,
            utilization: 1.0,
        });
        vm
    }

    fn insert_slot(&mut self, vm: usize, slot: Slot) {
        let slots = &mut self.vms[vm].slots;
        let pos = slots
            .iter()
            .position(|s| s.start > slot.start)
            .unwrap_or(slots.len());
        slots.insert(pos, slot);
    }

    /// Places a duplication-pinned task on its pinned VM unless plain
    /// selection would start it earlier; the pin must never delay its
    /// beneficiary. `no_dup_choice` is the counterfactual placement with
    /// duplication ignored entirely, `best_choice` the real alternative.
    /// Whatever wins, the committed start never exceeds the counterfactual.
    pub(super) fn place_pinned(
        &mut self,
        task: usize,
        entry: usize,
        no_dup_choice: Placement,
        best_choice: Placement,
    ) -> usize {
        let vm = self.pinned[task].expect("task carries a duplication pin");
        let pinned = self.probe_existing(task, vm, true);
        let keep = pinned.start <= no_dup_choice.start + 1e-9;
        let choice = if keep {
            pinned
        } else if best_choice.start <= no_dup_choice.start {
            best_choice
        } else {
            // Fall back to the counterfactual's VM, re-probed with the
            // duplicates usable so the claimed start stays the natural one.
            match no_dup_choice.vm {
                Some(vm) => self.probe_existing(task, vm, true),
                None => self.probe_fresh(task, no_dup_choice.fresh_type_ix, true),
            }
        };
        self.duplication_records.push(DuplicationRecord {
            entry,
            child: task,
            pinned_vm: vm,
            pinned_ast: pinned.start,
            free_ast: no_dup_choice.start,
            committed_ast: choice.start,
            kept_pin: keep,
        });
        self.commit(task, choice)
    }

    /// Entry-task duplication policy. `fresh_type_for` decides which type a
    /// duplication-provisioned VM gets (None skips the child).
    pub(super) fn duplicate_entry(
        &mut self,
        entry: usize,
        priority: &[f64],
        width2: usize,
        width1: usize,
        fresh_type_for: impl Fn(&Self, usize, f64) -> Option<usize>,
    ) {
        if self.options.no_duplication {
            return;
        }
        let total_rep_due = self.plan.opt_vm_count.min(width2) as i64 - width1 as i64;
        if total_rep_due <= 0 {
            return;
        }
        // Only children for which this entry is the sole parent qualify.
        let mut single: Vec<usize> = self
            .dag
            .children(entry)
            .filter(|&c| self.dag.in_degree(c) == 1)
            .collect();
        if single.len() < 2 {
            return;
        }
        single.sort_by(|&a, &b| priority[b].total_cmp(&priority[a]).then(a.cmp(&b)));
        let map_i = self.assignments[entry]
            .expect("entry placed before duplication")
            .vm;
        let weight = self.dag.task(entry).weight_mi;
        let et_home = et(weight, self.catalog.get(self.vms[map_i].type_ix));
        let targets: Vec<usize> = single[..single.len() - 1].to_vec();
        for &child in &targets {
            let data = self.dag.edge_data_mb(entry, child).unwrap_or(0.0);
            let tt_ij = tt(data, false, self.catalog.bandwidth_mbps);
            // Cheapest existing VM (other than home) where re-running the
            // entry beats shipping its output.
            let mut best: Option<(f64, usize)> = None;
            for vm in 0..self.vms.len() {
                if vm == map_i {
                    continue;
                }
                let ty = self.catalog.get(self.vms[vm].type_ix);
                if et(weight, ty) < et_home + tt_ij {
                    let cost = ec(et(weight, ty), ty, self.catalog.billing_period_s);
                    if best.is_none_or(|(c, v)| cost < c || (cost == c && vm < v)) {
                        best = Some((cost, vm));
                    }
                }
            }
            let vm = match best {
                Some((_, vm)) => vm,
                None => match fresh_type_for(self, entry, et_home + tt_ij) {
                    Some(type_ix) => self.provision(type_ix, 0.0, false),
                    None => continue,
                },
            };
            self.ensure_duplicate(entry, vm);
            self.pinned[child] = Some(vm);
        }
        // The highest-priority child left without a pin reads the data
        // where the original ran.
        if let Some(&child) = single.iter().find(|&&c| self.pinned[c].is_none()) {
            self.pinned[child] = Some(map_i);
        }
    }

    /// Schedules a duplicate execution of `entry` on `vm` unless one is
    /// already there. Entry tasks have no inputs, so only VM availability
    /// and existing load constrain the copy.
    fn ensure_duplicate(&mut self, entry: usize, vm: usize) {
        if self
            .duplicates
            .iter()
            .any(|d| d.task == entry && d.vm == vm)
        {
            return;
        }
        let duration = et(
            self.dag.task(entry).weight_mi,
            self.catalog.get(self.vms[vm].type_ix),
        );
        let start = self.earliest_start_on(vm, 0.0, duration);
        self.insert_slot(
            vm,
            Slot {
                task: entry,
                duplicate: true,
                start,
                end: start + duration,
                utilization: 1.0,
            },
        );
        self.duplicates.push(DuplicateExec {
            task: entry,
            vm,
            ast: start,
            aft: start + duration,
        });
    }

    /// Merges the subgroup whose pipeline is headed by `head` onto the
    /// head's VM and stretches it into the group slack via DVFS.
    ///
    /// The head was just placed by VM selection; it is re-timed together
    /// with the rest of the subgroup, appended in sequence. Utilization per
    /// [`SlackMode`]: normalized stretches the subgroup busy time to the
    /// longest pipeline's length, the printed formula undershoots the slack
    /// for any subgroup shorter than the longest.
    pub(super) fn merge_and_slack(
        &mut self,
        group: &PipelineGroup,
        subgroup_ix: usize,
        head: usize,
    ) {
        let subgroup = &group.subgroups[subgroup_ix];
        let sum_mi = group.subgroup_length_mi(subgroup);
        let utilization = match self.options.slack_mode {
            SlackMode::Normalized => (sum_mi / group.longest_mi).clamp(f64::MIN_POSITIVE, 1.0),
            SlackMode::Partial => {
                let slack = group.longest_mi - sum_mi;
                (group.longest_mi / (group.longest_mi + slack)).clamp(f64::MIN_POSITIVE, 1.0)
            }
            SlackMode::Off => unreachable!("slack phase disabled"),
        };
        let vm = self.assignments[head]
            .expect("head placed before slacking")
            .vm;
        let mips = self.catalog.get(self.vms[vm].type_ix).mips;

        // Drop the head's provisional slot; the whole subgroup is replayed
        // in sequence at the subgroup utilization.
        let head_slot = self.vms[vm]
            .slots
            .iter()
            .position(|s| s.task == head && !s.duplicate)
            .expect("head occupies a slot on its vm");
        self.vms[vm].slots.remove(head_slot);
        self.assignments[head] = None;

        // Own pipeline first, the rest of the subgroup in packed order.
        let own_pipe = group
            .pipelines
            .iter()
            .position(|p| p.head == head)
            .expect("head belongs to the group");
        let mut pipes = vec![own_pipe];
        pipes.extend(subgroup.iter().copied().filter(|&p| p != own_pipe));

        let mut tasks = Vec::new();
        let mut cursor = self.vms[vm].last_end();
        let mut span_start = f64::INFINITY;
        let mut busy = 0.0;
        for &p in &pipes {
            for &task in &group.pipelines[p].body {
                let ready = self.ready_on(task, Some(vm), true);
                let start = cursor.max(ready).max(self.vms[vm].available_s);
                let duration = et(
                    self.dag.task(task).weight_mi,
                    self.catalog.get(self.vms[vm].type_ix),
                ) / utilization;
                self.vms[vm].slots.push(Slot {
                    task,
                    duplicate: false,
                    start,
                    end: start + duration,
                    utilization,
                });
                self.assignments[task] = Some(Assignment {
                    vm,
                    ast: start,
                    aft: start + duration,
                    utilization,
                });
                self.premapped[task] = true;
                span_start = span_start.min(start);
                busy += duration;
                cursor = start + duration;
                tasks.push(task);
            }
        }
        self.slack_records.push(SlackRecord {
            head,
            vm,
            utilization,
            tasks,
            span: (span_start, cursor),
            busy_s: busy,
            longest_len_s: group.longest_mi / mips,
        });
    }

    pub(super) fn finalize(self, algorithm: &str, deadline_below_bound: bool) -> Schedule {
        let vms = self
            .vms
            .into_iter()
            .enumerate()
            .map(|(id, vm)| {
                let lease_end = vm.slots.last().map_or(vm.request_s, |s| s.end);
                let lease_start = if vm.bill_from_first_use {
                    vm.slots.first().map_or(lease_end, |s| s.start)
                } else {
                    vm.request_s
                };
                VmInstance {
                    id,
                    type_ix: vm.type_ix,
                    lease_start_s: lease_start,
                    available_from_s: vm.available_s,
                    lease_end_s: lease_end,
                    segments: vm
                        .slots
                        .iter()
                        .map(|s| UtilizationSegment {
                            start_s: s.start,
                            end_s: s.end,
                            utilization: s.utilization,
                        })
                        .collect(),
                }
            })
            .collect();
        Schedule {
            algorithm: algorithm.to_string(),
            plan: self.plan,
            assignments: self.assignments,
            vms,
            duplicates: self.duplicates,
            base_vm_count: self.base_vm_count,
            duplication_vm_count: self.duplication_vm_count,
            slack_records: self.slack_records,
            duplication_records: self.duplication_records,
            deadline_below_bound,
        }
    }
}
