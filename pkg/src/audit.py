#!/usr/bin/env python3
"""
Run Audit Logging Module
Append-only JSONL trail of pricing runs plus per-step timing metrics
"""

import hashlib
import json
import os
from datetime import datetime
from typing import Dict, List, Optional

import numpy as np


def _json_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    return str(value)


class RunAuditLogger:
    """
    Keeps a trail of every run executed in a session

    Events in audit_trail.jsonl:
    - session_start, run_start (command + resolved config)
    - fit_result, evolution_result, replay (outcomes)
    - error (failures with the exit class)

    Per-step Euler timings go to metrics.jsonl. Nothing here is written into
    result CSVs.
    """

    def __init__(self, log_dir: str = 'logs'):
        """
        Initialize audit logger

        Args:
            log_dir: Directory for the trail and metrics files
        """
        self.log_dir = log_dir
        os.makedirs(log_dir, exist_ok=True)

        self.audit_file = os.path.join(log_dir, 'audit_trail.jsonl')
        self.metrics_file = os.path.join(log_dir, 'metrics.jsonl')
        self.session_id = self._generate_session_id()
        self.performance_metrics: List[Dict] = []
        self.failures: List[Dict] = []

        print(f"📝 Audit logger initialized")
        print(f"   Session ID: {self.session_id}")
        print(f"   Log file: {self.audit_file}")

        self._write_log({
            'event_type': 'session_start',
            'session_id': self.session_id,
            'timestamp': datetime.now().isoformat(),
        })

    def _generate_session_id(self) -> str:
        timestamp = datetime.now().isoformat()
        return hashlib.sha256(f"{timestamp}{os.getpid()}".encode()).hexdigest()[:16]

    def _generate_run_id(self, command: str, timestamp: str) -> str:
        combined = f"{command}{timestamp}{self.session_id}"
        return hashlib.sha256(combined.encode()).hexdigest()[:16]

    def log_run_start(self, command: str, config: Optional[Dict] = None) -> str:
        """
        Log the start of a CLI command

        Args:
            command: fit, price or replay
            config: Resolved run configuration

        Returns:
            Unique run ID
        """
        timestamp = datetime.now().isoformat()
        run_id = self._generate_run_id(command, timestamp)
        self._write_log({
            'event_type': 'run_start',
            'run_id': run_id,
            'session_id': self.session_id,
            'command': command,
            'config': config or {},
            'timestamp': timestamp,
        })
        return run_id

    def log_fit_result(self, run_id: str, summary: Dict, latency_ms: float):
        self._write_log({
            'event_type': 'fit_result',
            'run_id': run_id,
            'session_id': self.session_id,
            'result': summary,
            'latency_ms': latency_ms,
            'success': bool(summary.get('converged', False)),
            'timestamp': datetime.now().isoformat(),
        })
        self._log_metric({'operation': 'fit', 'latency_ms': latency_ms,
                          'success': bool(summary.get('converged', False))})

    def log_evolution_result(self, run_id: str, summary: Dict, latency_ms: float, success: bool = True):
        self._write_log({
            'event_type': 'evolution_result',
            'run_id': run_id,
            'session_id': self.session_id,
            'result': summary,
            'latency_ms': latency_ms,
            'success': success,
            'timestamp': datetime.now().isoformat(),
        })
        self._log_metric({'operation': 'evolve', 'latency_ms': latency_ms, 'success': success})

    def log_replay(self, run_id: str, column: str, residual: float, reference: str):
        self._write_log({
            'event_type': 'replay',
            'run_id': run_id,
            'session_id': self.session_id,
            'column': column,
            'reference': reference,
            'residual': residual,
            'timestamp': datetime.now().isoformat(),
        })

    def log_step(self, step: int, tau: float, seconds: float, theta_dot_norm: float,
                 residual: float, oracle_distance: Optional[float] = None):
        """Per-step Euler metric (metrics.jsonl only)"""
        self._log_metric({
            'operation': 'euler_step',
            'step': step,
            'tau': tau,
            'latency_ms': seconds * 1000.0,
            'theta_dot_norm': theta_dot_norm,
            'residual': residual,
            'oracle_distance': oracle_distance,
            'success': bool(np.isfinite(theta_dot_norm)),
        })

    def log_error(self, run_id: Optional[str], error: str, error_type: str = 'general'):
        """
        Log errors

        Args:
            run_id: Associated run ID (None before a run started)
            error: Error message
            error_type: usage, non_convergence, divergence, ...
        """
        entry = {
            'event_type': 'error',
            'run_id': run_id,
            'session_id': self.session_id,
            'error_type': error_type,
            'error_message': error[:500],
            'timestamp': datetime.now().isoformat(),
        }
        self.failures.append(entry)
        self._write_log(entry)

    def _write_log(self, entry: Dict):
        try:
            with open(self.audit_file, 'a') as f:
                f.write(json.dumps(entry, default=_json_default) + "\n")
        except OSError as e:
            print(f"⚠️  Failed to write audit log: {e}")

    def _log_metric(self, metric: Dict):
        metric = dict(metric, timestamp=datetime.now().isoformat())
        self.performance_metrics.append(metric)
        try:
            with open(self.metrics_file, 'a') as f:
                f.write(json.dumps(metric, default=_json_default) + "\n")
        except OSError as e:
            print(f"⚠️  Failed to write metric: {e}")

    def _read_trail(self) -> List[Dict]:
        logs = []
        with open(self.audit_file, 'r') as f:
            for line in f:
                try:
                    logs.append(json.loads(line))
                except json.JSONDecodeError:
                    continue
        return logs

    def get_audit_summary(self, since_timestamp: Optional[str] = None) -> Dict:
        """
        Summarise the trail

        Args:
            since_timestamp: Only include events at or after this ISO time

        Returns:
            Summary statistics
        """
        if not os.path.exists(self.audit_file):
            return {'message': "No audit logs found"}

        logs = [l for l in self._read_trail()
                if since_timestamp is None or l.get('timestamp', '') >= since_timestamp]
        if not logs:
            return {'message': "No logs in time range"}

        event_types: Dict[str, int] = {}
        for log in logs:
            event_type = log.get('event_type', 'unknown')
            event_types[event_type] = event_types.get(event_type, 0) + 1

        runs = [l for l in logs if l.get('event_type') == 'run_start']
        fits = [l for l in logs if l.get('event_type') == 'fit_result']
        evolutions = [l for l in logs if l.get('event_type') == 'evolution_result']
        errors = [l for l in logs if l.get('event_type') == 'error']

        error_types: Dict[str, int] = {}
        for e in errors:
            error_types[e.get('error_type', 'general')] = error_types.get(e.get('error_type', 'general'), 0) + 1

        return {
            'total_events': len(logs),
            'time_range': {'start': logs[0].get('timestamp'), 'end': logs[-1].get('timestamp')},
            'event_breakdown': event_types,
            'runs': {
                'total': len(runs),
                'commands': sorted({r.get('command') for r in runs}),
            },
            'fits': {
                'total': len(fits),
                'converged': len([f for f in fits if f.get('success')]),
                'best_residual': min((f['result'].get('residual', np.inf) for f in fits), default=None),
            },
            'evolutions': {
                'total': len(evolutions),
                'completed': len([e for e in evolutions if e.get('success')]),
                'avg_latency_ms': float(np.mean([e['latency_ms'] for e in evolutions])) if evolutions else 0,
            },
            'errors': {'total': len(errors), 'types': error_types},
        }

    def get_performance_report(self) -> Dict:
        """Latency statistics for this session's fits, evolutions and Euler steps"""
        if not self.performance_metrics:
            return {'message': "No operations performed yet"}

        def stats(values: List[float]) -> Dict:
            if not values:
                return {'count': 0}
            return {
                'count': len(values),
                'avg_latency_ms': float(np.mean(values)),
                'min_latency_ms': float(np.min(values)),
                'max_latency_ms': float(np.max(values)),
                'p95_latency_ms': float(np.percentile(values, 95)),
                'p99_latency_ms': float(np.percentile(values, 99)),
            }

        by_op = {}
        for op in ('fit', 'evolve', 'euler_step'):
            by_op[op] = stats([m['latency_ms'] for m in self.performance_metrics if m['operation'] == op])

        return {
            'summary': {
                'session_id': self.session_id,
                'total_operations': len(self.performance_metrics),
                'successful_operations': len([m for m in self.performance_metrics if m.get('success')]),
                'failed_operations': len(self.failures),
            },
            'fit_performance': by_op['fit'],
            'evolution_performance': by_op['evolve'],
            'step_performance': by_op['euler_step'],
            'failures': self.failures,
        }

    def export_audit_report(self, output_path: str, since_timestamp: Optional[str] = None):
        """
        Export the summary and the full trail as a text report

        Args:
            output_path: Path for report file
            since_timestamp: Filter logs after this time
        """
        summary = self.get_audit_summary(since_timestamp)
        with open(output_path, 'w') as f:
            f.write("=" * 70 + "\n")
            f.write("PRICING RUN AUDIT REPORT\n")
            f.write("=" * 70 + "\n\n")
            f.write(f"Generated: {datetime.now().isoformat()}\n")
            f.write(f"Session ID: {self.session_id}\n\n")
            f.write(json.dumps(summary, indent=2, default=_json_default))
            f.write("\n\n")
            f.write("=" * 70 + "\n")
            f.write("DETAILED AUDIT TRAIL\n")
            f.write("=" * 70 + "\n\n")
            if os.path.exists(self.audit_file):
                for log in self._read_trail():
                    if since_timestamp is None or log.get('timestamp', '') >= since_timestamp:
                        f.write(json.dumps(log, indent=2, default=_json_default) + "\n\n")
        print(f"✅ Audit report exported to: {output_path}")


if __name__ == '__main__':
    audit = RunAuditLogger()
    run_id = audit.log_run_start('price', {'contract': 'european', 'n_steps': 3})
    for k in range(3):
        audit.log_step(k, 0.01 * k, 0.002, 0.5, 1e-12)
    audit.log_evolution_result(run_id, {'price': 7.9}, latency_ms=6.0)
    print("\n📊 Audit Summary:")
    print(json.dumps(audit.get_audit_summary(), indent=2, default=_json_default))
    print(json.dumps(audit.get_performance_report(), indent=2, default=_json_default))
