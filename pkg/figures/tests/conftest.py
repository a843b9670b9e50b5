import pytest

DIGEST_LINE = "# config_digest: 0123456789abcdef\n"

SWEEP_TEXT = DIGEST_LINE + (
    "temperature,delta,channel,chi,diverged,l_div\n"
    "1,0.05,triplet_even,0.5,false,\n"
    "1,0.05,triplet_odd,0.25,false,\n"
    "0.7,0.05,triplet_even,0.90000000000000002,false,\n"
    "0.7,0.05,triplet_odd,0.3,false,\n"
    "0.5,0.05,triplet_even,,true,9.2000000000000011\n"
    "0.5,0.05,triplet_odd,,true,9.2000000000000011\n"
    "0.3,0.05,triplet_even,0.1,false,\n"
    "0.3,0.05,triplet_odd,0.05,false,\n"
)

SOI_TEXT = DIGEST_LINE + (
    "k,lambda_so,e1,e2,e3,e4,e5,e6\n"
    "-3.1415926535897931,-0.001,-1,-0.5,0,0,0.5,1\n"
    "0,-0.089,-1.2,-0.6,0,0,0.6,1.2\n"
    "3.1415926535897931,-0.001,-1,-0.5,0,0,0.5,1\n"
)

COULOMB_TEXT = DIGEST_LINE + (
    "zeta,u,u_err,j,j_err,jp,jp_err\n"
    "0.5,0.44,0.001,-0.01,0.0002,0.02,0.0004\n"
    "1,0.3597,0.0011,-0.0105,0.00021,0.0211,0.00042\n"
    "2,,,,,,\n"
)


@pytest.fixture
def write_file(tmp_path):
    def _write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return _write


@pytest.fixture
def sweep_csv(write_file):
    return write_file("sweep.csv", SWEEP_TEXT)


@pytest.fixture
def soi_csv(write_file):
    return write_file("soi.csv", SOI_TEXT)


@pytest.fixture
def coulomb_csv(write_file):
    return write_file("coulomb.csv", COULOMB_TEXT)
