import numpy as np
import pytest

from fourdac import channel, demapper, fec
from fourdac.exceptions import LoadError, ParameterError
from fourdac.seeding import bit_stream, normal_stream


@pytest.fixture(scope="module")
def toy():
    return fec.load_code(fec.toy_code_path())


def bpsk_llrs(codeword, esn0_db, seed, frame):
    s2 = 10 ** (-esn0_db / 10) / 2
    y = (1.0 - 2.0 * codeword) + np.sqrt(s2) * normal_stream(seed, f"bpsk{frame}", 0, codeword.size)
    return 2 * y / s2


def test_toy_code_dimensions(toy):
    assert (toy.n_c, toy.k_c) == (16, 8)
    assert toy.rate == 0.5


def test_big_code_dimensions():
    code = fec.load_code(fec.big_code_path())
    assert (code.n_c, code.k_c) == (64800, 51840)
    assert code.rate == pytest.approx(0.8)


def test_load_rejects_out_of_range_index(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("4 2\n0 16 2\n1 2 3\n")
    with pytest.raises(LoadError):
        fec.load_code(bad)


def test_load_rejects_malformed(tmp_path):
    for text in ["", "4\n0 2\n1 2 3\n", "4 2\n0 x 2\n1 2 3\n", "4 2\n0 2\n"]:
        p = tmp_path / "f.txt"
        p.write_text(text)
        with pytest.raises(LoadError):
            fec.load_code(p)


def test_load_rejects_broken_staircase(tmp_path):
    # check 1 must reference parity columns 2 and 3
    p = tmp_path / "stairs.txt"
    p.write_text("4 2\n0 2\n1 3\n")
    with pytest.raises(LoadError):
        fec.load_code(p)


def test_encode_all_zero(toy):
    cw = fec.encode(toy, np.zeros(8, dtype=np.uint8))
    assert not cw.any()


def test_encode_systematic_and_valid(toy):
    rng = np.random.default_rng(1)
    for _ in range(20):
        u = rng.integers(0, 2, 8).astype(np.uint8)
        cw = fec.encode(toy, u)
        assert np.array_equal(cw[:8], u)
        assert not fec.syndrome(toy, cw).any()


def test_encode_linearity(toy):
    rng = np.random.default_rng(2)
    for _ in range(20):
        a = rng.integers(0, 2, 8).astype(np.uint8)
        b = rng.integers(0, 2, 8).astype(np.uint8)
        assert np.array_equal(fec.encode(toy, a ^ b), fec.encode(toy, a) ^ fec.encode(toy, b))


def test_encode_wrong_length(toy):
    with pytest.raises(ParameterError):
        fec.encode(toy, np.zeros(7, dtype=np.uint8))


def test_decode_noiseless_fast(toy):
    u = np.array([1, 0, 1, 1, 0, 0, 1, 0], dtype=np.uint8)
    cw = fec.encode(toy, u)
    llr = (1.0 - 2.0 * cw) * demapper.LLR_CLAMP
    out, converged, iters = fec.decode(toy, llr)
    assert converged and iters <= 2
    assert np.array_equal(out, u)


def test_decode_corrects_any_single_error(toy):
    for u in [np.zeros(8, dtype=np.uint8), (np.arange(8) % 2).astype(np.uint8)]:
        cw = fec.encode(toy, u)
        base = (1.0 - 2.0 * cw) * 8.0
        for flip in range(16):
            llr = base.copy()
            llr[flip] = -llr[flip]
            out, converged, _ = fec.decode(toy, llr)
            assert converged
            assert np.array_equal(out, u), f"flip at {flip}"


def test_decode_all_zero_llrs_does_not_converge(toy):
    out, converged, iters = fec.decode(toy, np.zeros(16), max_iters=20)
    assert not converged
    assert iters == 20


def test_decode_converged_word_satisfies_checks(toy):
    for frame in range(30):
        u = bit_stream(3, f"u{frame}", 8)
        cw = fec.encode(toy, u)
        llr = bpsk_llrs(cw, 1.0, 3, frame)
        _, converged, _, word = fec.decode(toy, llr, return_codeword=True)
        if converged:
            assert not fec.syndrome(toy, word).any()


def test_decode_rejects_bad_input(toy):
    with pytest.raises(ParameterError):
        fec.decode(toy, np.zeros(15))
    with pytest.raises(ParameterError):
        fec.decode(toy, np.zeros(16), variant="layered")


def test_high_snr_round_trip_many_frames(toy):
    # at 5 dB the raw channel still flips bits (pre-FEC BER < 1e-2) but
    # the decoder must clean every one of 100 frames
    pre_errs = 0
    for frame in range(100):
        u = bit_stream(7, f"rt{frame}", 8)
        cw = fec.encode(toy, u)
        llr = bpsk_llrs(cw, 5.0, 7, frame)
        pre_errs += int(np.count_nonzero((llr < 0) != cw))
        out, _, _ = fec.decode(toy, llr)
        assert np.array_equal(out, u)
    assert 0 < pre_errs < 0.01 * 100 * 16


def test_sum_product_beats_min_sum_in_transition(toy):
    totals = {"sum_product": 0, "min_sum": 0}
    for esn0 in (0.0, 1.0):
        for frame in range(300):
            u = bit_stream(42, f"u{esn0}{frame}", 8)
            cw = fec.encode(toy, u)
            llr = bpsk_llrs(cw, esn0, 42, frame)
            for variant in totals:
                out, _, _ = fec.decode(toy, llr, 50, variant=variant, alpha=0.75)
                totals[variant] += int(np.count_nonzero(out != u))
    assert totals["sum_product"] <= totals["min_sum"]
    assert totals["min_sum"] > 0


# --- frame arrangement ---


def test_schedule_divisible():
    sched = fec.make_schedule(64800, 6)
    assert (sched.n, sched.pad) == (10800, 0)


def test_schedule_with_padding():
    sched = fec.make_schedule(64800, 7)
    assert (sched.n, sched.pad) == (9258, 6)
    assert sched.n * 7 == 64800 + 6


def test_frame_round_trip_block():
    sched = fec.make_schedule(16, 6)
    cw = bit_stream(1, "cw", 16)
    words = fec.frame_to_symbols(cw, sched)
    assert words.shape == (3, 6)
    assert not words.reshape(-1)[16:].any()  # tail padding is zeros
    assert np.array_equal(fec.symbols_to_frame(words, sched), cw)


def test_frame_round_trip_random_interleaver():
    sched = fec.make_schedule(64800, 7, interleave="random", seed=9)
    cw = bit_stream(2, "cw", 64800)
    words = fec.frame_to_symbols(cw, sched)
    assert np.array_equal(fec.symbols_to_frame(words, sched), cw)
    # same seed, same permutation
    again = fec.make_schedule(64800, 7, interleave="random", seed=9)
    assert np.array_equal(sched.perm, again.perm)


def test_deframe_llrs_inverts_layout():
    sched = fec.make_schedule(16, 6, interleave="random", seed=3)
    cw = bit_stream(4, "cw", 16)
    words = fec.frame_to_symbols(cw, sched)
    llrs = 1.0 - 2.0 * words.astype(float)  # positive for bit 0
    back = fec.deframe_llrs(llrs, sched)
    assert np.array_equal((back < 0).astype(np.uint8), cw)


def test_frame_wrong_lengths():
    sched = fec.make_schedule(16, 6)
    with pytest.raises(ParameterError):
        fec.frame_to_symbols(np.zeros(15, dtype=np.uint8), sched)
    with pytest.raises(ParameterError):
        fec.symbols_to_frame(np.zeros((2, 6), dtype=np.uint8), sched)


def test_bicm_chain_identity_at_high_snr(toy, c6n):
    # end to end: encode -> 4D map -> channel -> exact LLRs -> decode
    sched = fec.make_schedule(toy.n_c, c6n.k)
    lut = c6n.point_index()
    weights = 1 << np.arange(c6n.k - 1, -1, -1)
    for frame in range(25):
        u = bit_stream(11, f"chain{frame}", toy.k_c)
        cw = fec.encode(toy, u)
        words = fec.frame_to_symbols(cw, sched)
        tx = c6n.points[lut[words @ weights]]
        rx = channel.transmit(tx, channel.ChannelConfig(25.0, seed=11),
                              start_index=frame * sched.n)
        llrs = demapper.exact_llrs(rx, c6n, channel.snr_to_sigma2(25.0))
        out, converged, _ = fec.decode(toy, fec.deframe_llrs(llrs, sched))
        assert converged
        assert np.array_equal(out, u)


# --- converter and generator ---


def write_alist(code, path):
    n, m = code.n_c, code.m
    cols = [[] for _ in range(n)]
    rows = [[] for _ in range(m)]
    for c, v in zip(code.check_idx, code.var_idx):
        cols[v].append(int(c) + 1)
        rows[c].append(int(v) + 1)
    max_col = max(len(x) for x in cols)
    max_row = max(len(x) for x in rows)
    lines = [f"{n} {m}", f"{max_col} {max_row}",
             " ".join(str(len(x)) for x in cols),
             " ".join(str(len(x)) for x in rows)]
    for x in cols:
        lines.append(" ".join(str(v) for v in x + [0] * (max_col - len(x))))
    for x in rows:
        lines.append(" ".join(str(v) for v in x + [0] * (max_row - len(x))))
    path.write_text("\n".join(lines) + "\n")


def test_alist_converter_round_trip(toy, tmp_path):
    alist = tmp_path / "toy.alist"
    write_alist(toy, alist)
    out = tmp_path / "toy.txt"
    fec.convert_alist(alist, out)
    code = fec.load_code(out)
    assert np.array_equal(code.check_idx, toy.check_idx)
    assert np.array_equal(code.var_idx, toy.var_idx)


def test_generated_code_structure():
    code = fec.generate_ira_code(3600, 2880, group=360, high_degree=11,
                                 n_high_groups=1, seed=3)
    assert (code.n_c, code.k_c) == (3600, 2880)
    u = bit_stream(0, "g", 2880)
    assert not fec.syndrome(code, fec.encode(code, u)).any()
