"""Server-consolidation planning: pack VMs onto fewer hosts.

The planner keeps the most-loaded hosts and drains the rest, placing the
displaced VMs first-fit in decreasing memory order. It retains the smallest
prefix of hosts (by current load) that can absorb everything; VMs already on
a retained host never move.
"""

from __future__ import annotations

from dataclasses import dataclass


class PlanningError(ValueError):
    """No feasible consolidation plan exists."""

    def __init__(self, message: str, unplaceable=()):
        super().__init__(message)
        self.unplaceable = list(unplaceable)


@dataclass(frozen=True)
class HostSpec:
    host_id: str
    cpu_capacity: int  # vcpus
    mem_capacity: float  # MB

    def __post_init__(self):
        if self.cpu_capacity <= 0 or self.mem_capacity <= 0:
            raise ValueError(f"host {self.host_id}: capacities must be > 0")


@dataclass(frozen=True)
class VMSpec:
    vm_id: str
    vcpus: int
    mem: float  # MB
    current_host: str

    def __post_init__(self):
        if self.vcpus <= 0 or self.mem <= 0:
            raise ValueError(f"vm {self.vm_id}: vcpus and mem must be > 0")


@dataclass(frozen=True)
class MigrationRequest:
    vm_id: str
    source_host: str
    target_host: str
    submitted_at: float  # seconds

    def __post_init__(self):
        if self.source_host == self.target_host:
            raise ValueError(f"vm {self.vm_id}: source equals target")


def plan(hosts, vms, submitted_at: float = 0.0) -> list[MigrationRequest]:
    """First-fit-decreasing consolidation plan.

    Hosts are ranked by current memory load (cpu load breaks ties); the
    smallest feasible prefix is retained and every VM outside it is placed
    first-fit, largest memory demand first, respecting both memory and vcpu
    capacity. Returns one request per moved VM; an already-consolidated
    cluster yields an empty plan. Raises :class:`PlanningError` when some
    VM fits on no host at all or no prefix can absorb the displaced VMs.
    """
    hosts = list(hosts)
    vms = list(vms)
    by_id = {h.host_id: h for h in hosts}
    for vm in vms:
        if vm.current_host not in by_id:
            raise PlanningError(f"vm {vm.vm_id} placed on unknown host {vm.current_host}")

    oversized = [
        vm.vm_id
        for vm in vms
        if not any(vm.mem <= h.mem_capacity and vm.vcpus <= h.cpu_capacity for h in hosts)
    ]
    if oversized:
        raise PlanningError(
            f"vm(s) exceed every host capacity: {oversized}", unplaceable=oversized
        )

    mem_load = {h.host_id: 0.0 for h in hosts}
    cpu_load = {h.host_id: 0 for h in hosts}
    for vm in vms:
        mem_load[vm.current_host] += vm.mem
        cpu_load[vm.current_host] += vm.vcpus

    ranked = sorted(
        hosts, key=lambda h: (-mem_load[h.host_id], -cpu_load[h.host_id], h.host_id)
    )

    last_unplaced: list[str] = []
    for k in range(1, len(ranked) + 1):
        retained = ranked[:k]
        retained_ids = {h.host_id for h in retained}
        movers = sorted(
            (vm for vm in vms if vm.current_host not in retained_ids),
            key=lambda vm: (-vm.mem, -vm.vcpus, vm.vm_id),
        )

        free_mem = {h.host_id: h.mem_capacity - mem_load[h.host_id] for h in retained}
        free_cpu = {h.host_id: h.cpu_capacity - cpu_load[h.host_id] for h in retained}

        placements: list[tuple[str, str]] = []
        unplaced: list[str] = []
        for vm in movers:
            for h in retained:
                if vm.mem <= free_mem[h.host_id] and vm.vcpus <= free_cpu[h.host_id]:
                    free_mem[h.host_id] -= vm.mem
                    free_cpu[h.host_id] -= vm.vcpus
                    placements.append((vm.vm_id, h.host_id))
                    break
            else:
                unplaced.append(vm.vm_id)
        if not unplaced:
            source = {vm.vm_id: vm.current_host for vm in vms}
            return [
                MigrationRequest(
                    vm_id=vm_id,
                    source_host=source[vm_id],
                    target_host=target,
                    submitted_at=submitted_at,
                )
                for vm_id, target in placements
            ]
        last_unplaced = unplaced

    raise PlanningError(
        f"no feasible packing; unplaceable vm(s): {last_unplaced}",
        unplaceable=last_unplaced,
    )
