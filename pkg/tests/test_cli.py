import io
import json

import numpy as np
import pytest

from bit_tracker import cli, evaluation, synthetic


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(argv, out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture(scope='module')
def seq_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp('data') / 'synth7'
    code, _, _ = run(['synth', str(root), '--seed', '7', '--frames', '20'])
    assert code == 0
    return root


def test_synth_is_deterministic(tmp_path):
    for name in ('a', 'b'):
        assert run(['synth', str(tmp_path / name), '--seed', '7', '--frames', '4'])[0] == 0
    for f in ('0001.png', '0004.png'):
        assert (tmp_path / 'a/img' / f).read_bytes() == (tmp_path / 'b/img' / f).read_bytes()
    assert ((tmp_path / 'a/groundtruth_rect.txt').read_text()
            == (tmp_path / 'b/groundtruth_rect.txt').read_text())


def test_synth_options(tmp_path):
    code, _, _ = run(['synth', str(tmp_path / 's'), '--frames', '5', '--velocity', '0,0',
                      '--frame-size', '120x100', '--target-size', '30x20', '--gray'])
    assert code == 0
    seq = evaluation.load_sequence(tmp_path / 's')
    assert np.all(seq.ground_truth == seq.ground_truth[0])
    assert seq.frame(0).shape == (100, 120)


def test_track_writes_one_row_per_frame(seq_dir, tmp_path):
    out = tmp_path / 'res.csv'
    code, msg, _ = run(['track', str(seq_dir), '-o', str(out)])
    assert code == 0 and 'fps' in msg
    lines = out.read_text().splitlines()
    assert lines[0] == 'frame,x,y,w,h' and len(lines) == 21
    gt = evaluation.load_sequence(seq_dir).ground_truth
    np.testing.assert_allclose(evaluation.read_results(out)[0], gt[0])


def test_track_missing_gt(tmp_path):
    (tmp_path / 'empty' / 'img').mkdir(parents=True)
    code, _, err = run(['track', str(tmp_path / 'empty'), '-o', str(tmp_path / 'x.csv')])
    assert code == 2 and 'groundtruth_rect.txt' in err


@pytest.mark.parametrize('mode', ['generative', 'discriminative'])
def test_track_other_modes(seq_dir, tmp_path, mode):
    out = tmp_path / f'{mode}.csv'
    assert run(['track', str(seq_dir), '-o', str(out), '--mode', mode])[0] == 0
    assert len(evaluation.read_results(out)) == 20


def test_eval_ground_truth_is_perfect(seq_dir, tmp_path):
    res = tmp_path / 'gt.csv'
    evaluation.write_results(res, evaluation.load_sequence(seq_dir).ground_truth)
    code, _, _ = run(['eval', str(res), str(seq_dir), '-o', str(tmp_path / 'ev')])
    assert code == 0
    summary = json.loads((tmp_path / 'ev' / 'summary.json').read_text())
    assert summary['precision@20'] == 1.0 and summary['f_score'] == 1.0
    prec = (tmp_path / 'ev' / 'precision.csv').read_text().splitlines()
    assert prec[0] == 'threshold,precision' and len(prec) == 52
    assert len((tmp_path / 'ev' / 'success.csv').read_text().splitlines()) == 22


def test_eval_shifted_results(seq_dir, tmp_path):
    res = tmp_path / 'shift.csv'
    evaluation.write_results(res, evaluation.load_sequence(seq_dir).ground_truth + [25, 0, 0, 0])
    assert run(['eval', str(res), str(seq_dir), '-o', str(tmp_path / 'ev')])[0] == 0
    summary = json.loads((tmp_path / 'ev' / 'summary.json').read_text())
    assert summary['precision@20'] == 0.0


def test_eval_random_matches_library(seq_dir, tmp_path, rng):
    gt = evaluation.load_sequence(seq_dir).ground_truth
    boxes = gt + rng.normal(0, 10, gt.shape).round(2)
    boxes[:, 2:] = np.abs(boxes[:, 2:])
    res = tmp_path / 'rand.csv'
    evaluation.write_results(res, boxes)
    assert run(['eval', str(res), str(seq_dir), '-o', str(tmp_path / 'ev')])[0] == 0
    summary = json.loads((tmp_path / 'ev' / 'summary.json').read_text())
    assert summary['precision@20'] == pytest.approx(evaluation.precision_at(boxes, gt), abs=1e-12)
    assert summary['auc'] == pytest.approx(evaluation.auc(evaluation.success_curve(boxes, gt)), abs=1e-12)
    assert summary['f_score'] == pytest.approx(evaluation.f_score(boxes, gt), abs=1e-12)


def test_eval_length_mismatch(seq_dir, tmp_path):
    res = tmp_path / 'short.csv'
    evaluation.write_results(res, evaluation.load_sequence(seq_dir).ground_truth[:5])
    code, _, err = run(['eval', str(res), str(seq_dir), '-o', str(tmp_path / 'ev')])
    assert code == 3 and '5' in err


def test_config_file_then_flags(tmp_path):
    conf = tmp_path / 'run.cfg'
    conf.write_text('# test\nmode = generative\nrho = 0.05\nlambda = 0.001\n'
                    'sigma_candidates = 0.2, 0.1\n')
    args = cli.build_parser().parse_args(['track', 'seq', '--config', str(conf), '--rho', '0.03'])
    cfg = cli.build_run_config(args)
    assert cfg.mode == 'generative' and cfg.lam == 0.001
    assert cfg.rho == 0.03
    assert cfg.sigma_candidates == (0.2, 0.1)
    assert cfg.sequence_path == 'seq'
    tc = cfg.tracker_config()
    assert tc.rho == 0.03 and tc.sigma_s_candidates == (0.2, 0.1)


def test_defaults():
    cfg = cli.build_run_config(cli.build_parser().parse_args(['track', 'seq']))
    assert (cfg.rho, cfg.sigma_candidates, cfg.mode, cfg.threads) == (0.02, (0.1, 0.08), 'hybrid', 1)


def test_bad_config_key(tmp_path, seq_dir):
    conf = tmp_path / 'bad.cfg'
    conf.write_text('learning_rate = 3\n')
    code, _, err = run(['track', str(seq_dir), '--config', str(conf)])
    assert code == 2 and 'bad.cfg:1' in err


def test_bench_reports_fps():
    code, msg, _ = run(['bench', '--frames', '31'])
    assert code == 0 and 'fps' in msg and '30 tracked frames' in msg
    assert run(['bench', '--frames', '10'])[0] == 2
