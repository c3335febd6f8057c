"""CLI surface: exit codes, determinism, JSON mode, end-to-end wiring."""

from __future__ import annotations

import hashlib
import json
import subprocess
import sys
import time

import pytest

from consentkit.cli import main


def run_cli(capsys, *argv) -> tuple[int, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out


class TestTaxonomyCommand:
    def test_compile_writes_codebook(self, capsys, fixtures_dir, tmp_path):
        out = tmp_path / "codebook.json"
        code, _ = run_cli(capsys, "taxonomy", "compile", str(fixtures_dir / "vocab_dpv_like.json"),
                          "-o", str(out))
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["vocab"] == 2
        assert len(doc["entries"]) == 31

    def test_compile_deterministic_bytes(self, capsys, fixtures_dir, tmp_path):
        hashes = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            code, _ = run_cli(capsys, "taxonomy", "compile",
                              str(fixtures_dir / "vocab_dpv_like.json"), "-o", str(out))
            assert code == 0
            hashes.append(hashlib.sha256(out.read_bytes()).hexdigest())
        assert hashes[0] == hashes[1]

    def test_validate_ok(self, capsys, fixtures_dir):
        code, out = run_cli(capsys, "--json", "taxonomy", "validate",
                            str(fixtures_dir / "vocab_dpv_like.json"))
        assert code == 0
        assert json.loads(out)["ok"]

    def test_validate_cycle_exit_2(self, capsys, tmp_path):
        bad = tmp_path / "cyclic.json"
        bad.write_text(json.dumps({
            "registry_id": 9, "name": "bad", "version": 1,
            "concepts": [{"id": "A", "parents": ["B"]}, {"id": "B", "parents": ["A"]}],
        }))
        code, out = run_cli(capsys, "--json", "taxonomy", "validate", str(bad))
        assert code == 2
        error = json.loads(out)["error"]
        assert error["type"] == "CycleError"
        assert "A" in error["message"] or "B" in error["message"]


class TestPolicyCommand:
    def test_encode_decode_identity(self, capsys, fixtures_dir, tmp_path):
        code, out = run_cli(capsys, "--json", "policy", "encode",
                            str(fixtures_dir / "policy_sample.json"),
                            "--registry", str(fixtures_dir / "registry.json"))
        assert code == 0
        encoded = json.loads(out)["encoded"]
        code, out = run_cli(capsys, "--json", "policy", "decode", encoded,
                            "--registry", str(fixtures_dir / "registry.json"))
        assert code == 0
        assert json.loads(out) == json.loads((fixtures_dir / "policy_sample.json").read_text())

    def test_strip_is_shorter(self, capsys, fixtures_dir):
        code, out = run_cli(capsys, "--json", "policy", "strip",
                            str(fixtures_dir / "policy_sample.json"), "--keep", "purposes")
        assert code == 0
        payload = json.loads(out)
        assert payload["stripped_chars"] < payload["full_chars"]

    def test_decode_truncated_exit_2(self, capsys, fixtures_dir):
        code, out = run_cli(capsys, "--json", "policy", "encode",
                            str(fixtures_dir / "policy_sample.json"))
        encoded = json.loads(out)["encoded"]
        code, out = run_cli(capsys, "--json", "policy", "decode", encoded[: len(encoded) // 2],
                            "--registry", str(fixtures_dir / "registry.json"))
        assert code == 2
        assert json.loads(out)["error"]["type"] == "TruncatedError"


class TestMatchCommand:
    def test_newsletter_prohibit_explains_path(self, capsys, fixtures_dir):
        code, out = run_cli(capsys, "match",
                            "--prefs", str(fixtures_dir / "prefs_prohibit_marketing.json"),
                            "--requests", str(fixtures_dir / "consent_requests.json"),
                            "--registry", str(fixtures_dir / "registry.json"),
                            "--explain")
        assert code == 0
        assert "q1: object" in out
        assert "SendNewsletters -> Marketing" in out

    def test_empty_prefs_prompt_exit_0(self, capsys, fixtures_dir):
        code, out = run_cli(capsys, "--json", "match",
                            "--prefs", str(fixtures_dir / "prefs_empty.json"),
                            "--requests", str(fixtures_dir / "consent_requests.json"),
                            "--registry", str(fixtures_dir / "registry.json"))
        assert code == 0
        assert json.loads(out)["decisions"][0]["outcome"] == "prompt"

    def test_oracle_check(self, capsys):
        code, out = run_cli(capsys, "--json", "match", "--oracle-check",
                            "--cases", "25", "--seed", "7")
        assert code == 0
        payload = json.loads(out)
        assert payload["mismatches"] == 0


class TestDialogueCommand:
    def test_gen_complete_passes_lint(self, capsys, fixtures_dir, tmp_path):
        spec_path = tmp_path / "spec.json"
        code, _ = run_cli(capsys, "dialogue", "gen", "--mode", "complete",
                          "--requests", str(fixtures_dir / "consent_requests.json"),
                          "--registry", str(fixtures_dir / "registry.json"),
                          "-o", str(spec_path))
        assert code == 0
        code, out = run_cli(capsys, "dialogue", "lint", str(spec_path),
                            "--registry", str(fixtures_dir / "registry.json"))
        assert code == 0
        assert "clean" in out

    def test_lint_l1_fixture_exit_1(self, capsys, fixtures_dir):
        code, out = run_cli(capsys, "--json", "dialogue", "lint",
                            str(fixtures_dir / "lint" / "l1_preselected_toggle.json"),
                            "--registry", str(fixtures_dir / "registry.json"))
        assert code == 1
        findings = [json.loads(line) for line in out.strip().splitlines()]
        assert findings[0]["rule"] == "L1"

    def test_lint_warning_fixture_exit_0(self, capsys, fixtures_dir):
        code, out = run_cli(capsys, "--json", "dialogue", "lint",
                            str(fixtures_dir / "lint" / "l4_recipients_hidden.json"),
                            "--registry", str(fixtures_dir / "registry.json"))
        assert code == 0
        findings = [json.loads(line) for line in out.strip().splitlines()]
        assert {f["rule"] for f in findings} == {"L4"}

    def test_lint_parity_spec_vs_markup(self, capsys, fixtures_dir, tmp_path):
        from consentkit.dialogue import DialogueSpec
        from consentkit.markup import emit_markup

        spec_path = tmp_path / "spec.json"
        run_cli(capsys, "dialogue", "gen", "--mode", "complete",
                "--requests", str(fixtures_dir / "consent_requests.json"),
                "--registry", str(fixtures_dir / "registry.json"), "-o", str(spec_path))
        spec = DialogueSpec.from_json(json.loads(spec_path.read_text()))
        html_path = tmp_path / "page.html"
        html_path.write_text(emit_markup(spec))

        code_spec, out_spec = run_cli(capsys, "--json", "dialogue", "lint", str(spec_path),
                                      "--registry", str(fixtures_dir / "registry.json"))
        code_html, out_html = run_cli(capsys, "--json", "dialogue", "lint", str(html_path),
                                      "--registry", str(fixtures_dir / "registry.json"))
        rules_of = lambda text: sorted(
            (json.loads(line)["rule"], json.loads(line)["severity"])
            for line in text.strip().splitlines() if line.startswith("{"))
        assert code_spec == code_html == 0
        assert rules_of(out_spec) == rules_of(out_html) == []

    def test_choices_mode_rejects_controller_controls(self, capsys, fixtures_dir, tmp_path):
        doc = json.loads((fixtures_dir / "consent_requests.json").read_text())
        doc["controls"] = [{"control_id": "evil-accept", "kind": "decision",
                            "action": "accept_all", "bound_requests": ["q1"]}]
        bad = tmp_path / "with_controls.json"
        bad.write_text(json.dumps(doc))
        code, out = run_cli(capsys, "--json", "dialogue", "gen", "--mode", "choices",
                            "--notice-ref", "main-notice", "--requests", str(bad))
        assert code == 2
        assert "controls" in json.loads(out)["error"]["message"]

    def test_gen_template_mode(self, capsys, fixtures_dir, tmp_path):
        spec_path = tmp_path / "spec.json"
        code, _ = run_cli(capsys, "dialogue", "gen", "--mode", "template",
                          "--requests", str(fixtures_dir / "consent_requests.json"),
                          "--registry", str(fixtures_dir / "registry.json"),
                          "--template", str(fixtures_dir / "template_two_layer.json"),
                          "-o", str(spec_path))
        assert code == 0
        doc = json.loads(spec_path.read_text())
        assert len(doc["layers"]) == 2


class TestAgentCommand:
    def test_headless_run_against_harness(self, capsys, site, fixtures_dir):
        code, out = run_cli(capsys, "--json", "agent", "run", "--headless",
                            "--prefs", str(fixtures_dir / "prefs_prohibit_marketing.json"),
                            "--registry", str(fixtures_dir / "registry.json"),
                            "--url", site.url)
        assert code == 0
        report = json.loads(out)
        assert report["signal"]["object"] == ["q1"]
        assert report["prompts_unanswered"] == 0
        assert site.log_summary()["received"]["object"] == ["q1"]

    def test_transport_error_exit_3(self, capsys, fixtures_dir):
        code, out = run_cli(capsys, "--json", "agent", "run", "--headless",
                            "--prefs", str(fixtures_dir / "prefs_prohibit_marketing.json"),
                            "--registry", str(fixtures_dir / "registry.json"),
                            "--url", "http://127.0.0.1:1/")
        assert code == 3
        assert json.loads(out)["error"]["type"] == "TransportError"


@pytest.mark.slow
class TestServeSubprocess:
    def test_serve_website_and_agent_end_to_end(self, fixtures_dir, tmp_path):
        log_path = tmp_path / "site_log.jsonl"
        proc = subprocess.Popen(
            [sys.executable, "-m", "consentkit.cli", "--json", "serve", "website",
             "--config", str(fixtures_dir / "site_config.json"),
             "--log", str(log_path), "--max-seconds", "30"],
            stdout=subprocess.PIPE, text=True,
        )
        try:
            line = proc.stdout.readline()
            # --json emits an indented object; read until it closes
            while not line.strip().startswith("{"):
                line = proc.stdout.readline()
            buf = line
            while True:
                try:
                    url = json.loads(buf)["url"]
                    break
                except json.JSONDecodeError:
                    buf += proc.stdout.readline()
            result = subprocess.run(
                [sys.executable, "-m", "consentkit.cli", "--json", "agent", "run", "--headless",
                 "--prefs", str(fixtures_dir / "prefs_prohibit_marketing.json"),
                 "--registry", str(fixtures_dir / "registry.json"),
                 "--url", url],
                capture_output=True, text=True, timeout=30,
            )
            assert result.returncode == 0, result.stderr
            report = json.loads(result.stdout)
            deadline = time.time() + 5
            while time.time() < deadline and not log_path.exists():
                time.sleep(0.05)
            logged = [json.loads(l) for l in log_path.read_text().splitlines()]
            assert logged[0]["object"] == report["signal"]["object"] == ["q1"]
        finally:
            proc.terminate()
            proc.wait(timeout=10)
