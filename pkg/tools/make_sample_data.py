"""Regenerate the bundled sample tables and base map under src/tracemap/data.

Country points follow a plain equirectangular layout (13.3 px per degree,
longitude 0 at x=1843, equator at y=1301) anchored so that Reunion sits at
(2581, 1582); Australia is pinned at (3626, 1638).
"""

from pathlib import Path

from PIL import Image, ImageDraw

DATA = Path(__file__).resolve().parent.parent / "src" / "tracemap" / "data"
WIDTH, HEIGHT = 4300, 2450
SCALE, X0, Y0 = 13.3, 1843, 1301

CENTROIDS = {
    "BR": (-52.0, -10.0), "CA": (-100.0, 56.0), "CN": (104.0, 35.0), "DE": (10.0, 51.0),
    "ES": (-4.0, 40.0), "FR": (2.5, 46.5), "GB": (-2.0, 54.0), "IN": (79.0, 22.0),
    "IT": (12.5, 42.5), "JP": (138.0, 36.0), "KE": (38.0, 0.0), "MG": (47.0, -19.0),
    "MU": (57.5, -20.3), "NL": (5.3, 52.2), "PY": (-58.0, -23.0), "SC": (55.5, -4.6),
    "SG": (103.8, 1.35), "US": (-98.0, 39.0), "YT": (45.1, -12.8), "ZA": (24.0, -29.0),
}
PINNED = {"RE": (2581, 1582), "AU": (3626, 1638)}


def points():
    pts = dict(PINNED)
    for cc, (lon, lat) in CENTROIDS.items():
        pts[cc] = (round(X0 + SCALE * lon), round(Y0 - SCALE * lat))
    return dict(sorted(pts.items()))


def main():
    pts = points()
    with open(DATA / "points.csv", "w", newline="\n") as fh:
        fh.write("# country,x,y  pixel of each country on world.png\n")
        for cc, (x, y) in pts.items():
            fh.write(f"{cc},{x},{y}\n")

    im = Image.new("RGB", (WIDTH, HEIGHT), (222, 235, 247))
    draw = ImageDraw.Draw(im)
    for lon in range(-135, 181, 15):
        x = round(X0 + SCALE * lon)
        if 0 <= x < WIDTH:
            draw.line([(x, 0), (x, HEIGHT - 1)], fill=(200, 214, 230), width=1)
    for lat in range(-75, 91, 15):
        y = round(Y0 - SCALE * lat)
        if 0 <= y < HEIGHT:
            draw.line([(0, y), (WIDTH - 1, y)], fill=(200, 214, 230), width=3 if lat == 0 else 1)
    for cc, (x, y) in pts.items():
        draw.ellipse([x - 6, y - 6, x + 6, y + 6], fill=(120, 120, 120))
        draw.text((x + 9, y - 14), cc, fill=(60, 60, 60))
    im.save(DATA / "world.png", optimize=True)


if __name__ == "__main__":
    main()
